use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tunebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunebench"))
        .args(args)
        .env_remove("TUNEBENCH_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn report_without_compare_fails_with_missing_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let o = tunebench(&["report", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("missing summaries"), "{}", stderr(&o));
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    assert_eq!(tunebench(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tunebench(&["tune", "--jobs", "many"]).status.code(), Some(2));

    let missing = dir.path().join("absent.toml");
    assert_eq!(tunebench(&["tune", "--plan", path(&missing), "--out", out]).status.code(), Some(3));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "scale = \"big\"\n").unwrap();
    assert_eq!(tunebench(&["tune", "--plan", path(&bad), "--out", out]).status.code(), Some(3));

    for args in [
        ["--scale", "-1"],
        ["--algorithms", "SHC,XYZ"],
        ["--characteristics", "width"],
        ["--jobs", "0"],
    ] {
        let mut full = vec!["tune", "--out", out];
        full.extend(args);
        let o = tunebench(&full);
        assert_eq!(o.status.code(), Some(4), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_documents_exit_codes() {
    let o = tunebench(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Exit codes") && text.contains("missing summaries"));
}

#[test]
fn generate_writes_every_landscape_of_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    fs::write(&plan, "characteristics = [\"ratio\"]\nscale = 0.05\n").unwrap();
    let out = dir.path().join("out");
    let o = tunebench(&["generate", "--plan", path(&plan), "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut files = 0;
    for value in fs::read_dir(out.join("landscapes/ratio")).unwrap() {
        files += fs::read_dir(value.unwrap().path()).unwrap().count();
    }
    // 5 ratio values x (1 tuning + 5 comparison landscapes)
    assert_eq!(files, 30);
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tunebench"))
        .args(["generate", "--characteristics", "dimensions", "--scale", "0.01"])
        .env("TUNEBENCH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("landscapes/dimensions/10").is_dir());
    assert!(dir.path().join("plan.toml").is_file());
}

#[test]
fn all_with_filters_produces_the_filtered_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = ["all", "--scale", "0.05", "--algorithms", "SHC,ES", "--out", path(&out)];
    let o = tunebench(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "algorithm,characteristic,tuned,mu,sigma");
    assert_eq!(lines.len(), 1 + 2 * 5 * 2);
    assert!(out.join("plots/SHC.svg").is_file() && out.join("plots/ES.svg").is_file());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("SHC smoothness=100"));

    // re-running reuses every artifact and reproduces the summary exactly
    let o = tunebench(&args);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("reusing persisted results"));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), summary);

    // report alone follows the plan written by `all`
    let o = tunebench(&["report", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), summary);
}
