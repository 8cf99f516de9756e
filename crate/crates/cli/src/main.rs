use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tunebench::harness::load_summaries;
use tunebench::report::emit_report;
use tunebench::{AlgorithmId, Characteristic, Error, Experiment, ExperimentPlan, OptimizerRunner};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  runtime failure
  2  usage error (unknown command or malformed flags)
  3  plan file unreadable or invalid
  4  invalid override (--scale, --seed, --jobs, --algorithms, --characteristics)
  5  missing summaries (run `compare` before `report`)";

#[derive(Parser)]
#[command(name = "tunebench", version, about = "Tuned vs. untuned optimizer benchmark on Gaussian landscapes", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every tuning and comparison landscape of the plan.
    Generate(Common),
    /// Race candidate configurations for every sweep value.
    Tune(Common),
    /// Run paired untuned/tuned comparisons, tuning where needed.
    Compare(Common),
    /// Write summary.csv and one spider plot per algorithm.
    Report(Common),
    /// tune, then compare, then report.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Plan file (TOML). Defaults to <out>/plan.toml when present.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "TUNEBENCH_OUT", default_value = "tunebench-out")]
    out: PathBuf,
    /// Multiplier on landscape counts and repetitions (1 = full scale).
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical CPU count).
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated algorithm filter, e.g. SHC,ES.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Comma-separated characteristic filter, e.g. ratio,smoothness.
    #[arg(long, value_delimiter = ',')]
    characteristics: Option<Vec<String>>,
}

#[derive(Debug)]
enum Failure {
    Plan(anyhow::Error),
    Override(anyhow::Error),
    Missing(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Plan(_) => 3,
            Failure::Override(_) => 4,
            Failure::Missing(_) => 5,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Plan(e) | Failure::Override(e) | Failure::Missing(e) | Failure::Other(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingSummaries(_) => Failure::Missing(e.into()),
            e => Failure::Other(e.into()),
        }
    }
}

fn load_plan(common: &Common) -> Result<ExperimentPlan, Failure> {
    let default_path = common.out.join("plan.toml");
    let path = match &common.plan {
        Some(p) => Some(p.clone()),
        None => default_path.exists().then_some(default_path),
    };
    let Some(path) = path else {
        return Ok(ExperimentPlan::default());
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("cannot read plan {}", path.display()))
        .map_err(Failure::Plan)?;
    ExperimentPlan::from_toml(&text)
        .with_context(|| format!("invalid plan {}", path.display()))
        .map_err(Failure::Plan)
}

fn apply_overrides(mut plan: ExperimentPlan, common: &Common) -> anyhow::Result<ExperimentPlan> {
    if let Some(scale) = common.scale {
        plan.scale = scale;
    }
    if let Some(seed) = common.seed {
        plan.master_seed = seed;
    }
    if let Some(algs) = &common.algorithms {
        plan.algorithms = algs
            .iter()
            .map(|a| a.parse::<AlgorithmId>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(chs) = &common.characteristics {
        plan.characteristics = chs
            .iter()
            .map(|c| c.parse::<Characteristic>().map(Characteristic::spec))
            .collect::<Result<_, _>>()?;
    }
    if common.jobs == Some(0) {
        anyhow::bail!("--jobs must be at least 1");
    }
    plan.validate()?;
    Ok(plan)
}

fn write_plan(out: &Path, plan: &ExperimentPlan) -> Result<(), Failure> {
    tunebench::harness::write_atomic(&out.join("plan.toml"), &plan.to_toml()).map_err(Failure::from)
}

fn report(out: &Path, plan: &ExperimentPlan) -> Result<(), Failure> {
    let rows = load_summaries(out, plan)?;
    for path in emit_report(out, &rows, &plan.algorithms)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Command::Generate(c) | Command::Tune(c) | Command::Compare(c) | Command::Report(c) | Command::All(c) => c,
    };
    let plan = apply_overrides(load_plan(common)?, common).map_err(Failure::Override)?;
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot start worker pool")
            .map_err(Failure::Other)?;
    }
    let out = common.out.as_path();
    let progress = |line: &str| println!("{line}");
    let experiment = Experiment::new(&plan, &OptimizerRunner)
        .with_output(out)
        .with_progress(&progress);
    match &cli.command {
        Command::Generate(_) => {
            write_plan(out, &plan)?;
            let n = experiment.generate_landscapes()?;
            println!("wrote {n} landscapes under {}", out.join("landscapes").display());
        }
        Command::Tune(_) => {
            write_plan(out, &plan)?;
            let n = experiment.tune_all()?.len();
            println!("{n} tuned configurations under {}", out.join("tuned").display());
        }
        Command::Compare(_) => {
            experiment.full_experiment()?;
        }
        Command::Report(_) => report(out, &plan)?,
        Command::All(_) => {
            write_plan(out, &plan)?;
            experiment.tune_all()?;
            experiment.full_experiment()?;
            report(out, &plan)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
