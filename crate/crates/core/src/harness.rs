//! Experiment orchestration: characteristic sweeps, per-value tuning, paired
//! tuned/untuned comparisons and resumable persistence.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, LandscapeSpec};
use crate::optimizers::{default_configuration_for, parameter_space, AlgorithmId, Budget, Configuration, RunRecord};
use crate::seed::{hash_bytes, SeedPath};
use crate::stats::{average_error, RobustnessSummary, ValueErrorSummary};
use crate::tuner::{self, block_seed, enumerate_candidates, RaceSettings, Runner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Characteristic {
    LocalOptima,
    Ratio,
    Dimensions,
    Boundary,
    Smoothness,
}

impl Characteristic {
    pub const ALL: [Characteristic; 5] = [
        Characteristic::LocalOptima,
        Characteristic::Ratio,
        Characteristic::Dimensions,
        Characteristic::Boundary,
        Characteristic::Smoothness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Characteristic::LocalOptima => "local_optima",
            Characteristic::Ratio => "ratio",
            Characteristic::Dimensions => "dimensions",
            Characteristic::Boundary => "boundary",
            Characteristic::Smoothness => "smoothness",
        }
    }

    /// Human-readable axis label.
    pub fn label(self) -> &'static str {
        match self {
            Characteristic::LocalOptima => "# of local optima",
            Characteristic::Ratio => "Local optima ratio",
            Characteristic::Dimensions => "Dimensions",
            Characteristic::Boundary => "Boundary constraints",
            Characteristic::Smoothness => "Smoothness",
        }
    }

    pub fn spec(self) -> CharacteristicSpec {
        let (min, max, step, default) = match self {
            Characteristic::LocalOptima => (0.0, 9.0, 1.0, 3.0),
            Characteristic::Ratio => (0.1, 0.9, 0.2, 0.5),
            Characteristic::Dimensions => (1.0, 10.0, 1.0, 2.0),
            Characteristic::Boundary => (10.0, 100.0, 10.0, 30.0),
            Characteristic::Smoothness => (10.0, 100.0, 10.0, 15.0),
        };
        CharacteristicSpec {
            name: self,
            min,
            max,
            step,
            default,
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Characteristic::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown characteristic '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSpec {
    pub name: Characteristic,
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub default: f64,
}

/// `min, min + step, ..., max`, each value snapped to ten decimals so that
/// e.g. 0.1 + 0.2 comes out as 0.3.
pub fn sweep_values(spec: &CharacteristicSpec) -> Vec<f64> {
    let count = ((spec.max - spec.min) / spec.step).round() as usize + 1;
    (0..count)
        .map(|i| ((spec.min + i as f64 * spec.step) * 1e10).round() / 1e10)
        .collect()
}

fn value_index(characteristic: Characteristic, value: f64) -> Result<usize> {
    sweep_values(&characteristic.spec())
        .iter()
        .position(|v| (v - value).abs() <= 1e-9 * v.abs().max(1.0))
        .ok_or_else(|| Error::InvalidInput(format!("{value} is not a {characteristic} sweep value")))
}

/// Table defaults with `characteristic` set to `value`.
pub fn landscape_spec_for(characteristic: Characteristic, value: f64, seed: u64) -> Result<LandscapeSpec> {
    let value = sweep_values(&characteristic.spec())[value_index(characteristic, value)?];
    let mut spec = LandscapeSpec {
        num_local_optima: Characteristic::LocalOptima.spec().default as usize,
        ratio: Characteristic::Ratio.spec().default,
        dimensions: Characteristic::Dimensions.spec().default as usize,
        boundary: Characteristic::Boundary.spec().default,
        smoothness: Characteristic::Smoothness.spec().default,
        seed,
    };
    match characteristic {
        Characteristic::LocalOptima => spec.num_local_optima = value as usize,
        Characteristic::Ratio => spec.ratio = value,
        Characteristic::Dimensions => spec.dimensions = value as usize,
        Characteristic::Boundary => spec.boundary = value,
        Characteristic::Smoothness => spec.smoothness = value,
    }
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RacePlan {
    pub alpha: f64,
    pub min_blocks: usize,
    pub runs_per_candidate: usize,
    pub max_candidates: usize,
}

impl Default for RacePlan {
    fn default() -> Self {
        RacePlan {
            alpha: tuner::DEFAULT_ALPHA,
            min_blocks: tuner::DEFAULT_MIN_BLOCKS,
            runs_per_candidate: tuner::DEFAULT_RUNS_PER_CANDIDATE,
            max_candidates: tuner::DEFAULT_MAX_CANDIDATES,
        }
    }
}

pub const DEFAULT_SCALE: f64 = 0.1;
pub const DEFAULT_MASTER_SEED: u64 = 20_130_601;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub algorithms: Vec<AlgorithmId>,
    pub characteristics: Vec<CharacteristicSpec>,
    pub tuning_landscapes_per_value: usize,
    pub comparison_landscapes_per_value: usize,
    pub repetitions_per_landscape: usize,
    pub budget: Budget,
    pub master_seed: u64,
    /// Multiplier on the two landscape counts and the repetitions.
    pub scale: f64,
    pub race: RacePlan,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            algorithms: AlgorithmId::ALL.to_vec(),
            characteristics: Characteristic::ALL.iter().map(|c| c.spec()).collect(),
            tuning_landscapes_per_value: 5,
            comparison_landscapes_per_value: 100,
            repetitions_per_landscape: 100,
            budget: Budget::default(),
            master_seed: DEFAULT_MASTER_SEED,
            scale: DEFAULT_SCALE,
            race: RacePlan::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    algorithms: Option<Vec<String>>,
    characteristics: Option<Vec<String>>,
    tuning_landscapes_per_value: Option<usize>,
    comparison_landscapes_per_value: Option<usize>,
    repetitions_per_landscape: Option<usize>,
    budget: Option<usize>,
    master_seed: Option<u64>,
    scale: Option<f64>,
    race: Option<RaceFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RaceFile {
    alpha: Option<f64>,
    min_blocks: Option<usize>,
    runs_per_candidate: Option<usize>,
    max_candidates: Option<usize>,
}

/// Which disjoint landscape family a landscape belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LandscapeRole {
    Tuning,
    Comparison,
}

impl LandscapeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            LandscapeRole::Tuning => "tune",
            LandscapeRole::Comparison => "compare",
        }
    }
}

impl ExperimentPlan {
    /// Parses a TOML plan; absent fields keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: PlanFile = toml::from_str(text).map_err(|e| Error::parse("plan", e.to_string()))?;
        let mut plan = ExperimentPlan::default();
        if let Some(algs) = file.algorithms {
            plan.algorithms = algs.iter().map(|a| a.parse()).collect::<Result<_>>()?;
        }
        if let Some(chs) = file.characteristics {
            plan.characteristics = chs
                .iter()
                .map(|c| c.parse::<Characteristic>().map(Characteristic::spec))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = file.tuning_landscapes_per_value {
            plan.tuning_landscapes_per_value = v;
        }
        if let Some(v) = file.comparison_landscapes_per_value {
            plan.comparison_landscapes_per_value = v;
        }
        if let Some(v) = file.repetitions_per_landscape {
            plan.repetitions_per_landscape = v;
        }
        if let Some(v) = file.budget {
            plan.budget = Budget::new(v).map_err(|e| Error::Plan(e.to_string()))?;
        }
        if let Some(v) = file.master_seed {
            plan.master_seed = v;
        }
        if let Some(v) = file.scale {
            plan.scale = v;
        }
        if let Some(race) = file.race {
            let r = &mut plan.race;
            r.alpha = race.alpha.unwrap_or(r.alpha);
            r.min_blocks = race.min_blocks.unwrap_or(r.min_blocks);
            r.runs_per_candidate = race.runs_per_candidate.unwrap_or(r.runs_per_candidate);
            r.max_candidates = race.max_candidates.unwrap_or(r.max_candidates);
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_toml(&self) -> String {
        let quoted = |items: Vec<&str>| {
            items
                .iter()
                .map(|s| format!("\"{s}\""))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "algorithms = [{}]\ncharacteristics = [{}]\ntuning_landscapes_per_value = {}\n\
             comparison_landscapes_per_value = {}\nrepetitions_per_landscape = {}\nbudget = {}\n\
             master_seed = {}\nscale = {:?}\n\n[race]\nalpha = {:?}\nmin_blocks = {}\n\
             runs_per_candidate = {}\nmax_candidates = {}\n",
            quoted(self.algorithms.iter().map(|a| a.as_str()).collect()),
            quoted(self.characteristics.iter().map(|c| c.name.as_str()).collect()),
            self.tuning_landscapes_per_value,
            self.comparison_landscapes_per_value,
            self.repetitions_per_landscape,
            self.budget.max_evaluations,
            self.master_seed,
            self.scale,
            self.race.alpha,
            self.race.min_blocks,
            self.race.runs_per_candidate,
            self.race.max_candidates,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("tuning_landscapes_per_value", self.tuning_landscapes_per_value),
            ("comparison_landscapes_per_value", self.comparison_landscapes_per_value),
            ("repetitions_per_landscape", self.repetitions_per_landscape),
            ("race.min_blocks", self.race.min_blocks),
            ("race.runs_per_candidate", self.race.runs_per_candidate),
            ("race.max_candidates", self.race.max_candidates),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v < 1) {
            return Err(Error::Plan(format!("{name} must be at least 1")));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Plan(format!("scale must be positive, got {}", self.scale)));
        }
        if !(self.race.alpha > 0.0 && self.race.alpha < 1.0) {
            return Err(Error::Plan(format!("race.alpha must lie in (0, 1), got {}", self.race.alpha)));
        }
        if self.race.runs_per_candidate < self.race.min_blocks {
            return Err(Error::Plan("race.runs_per_candidate must be at least race.min_blocks".into()));
        }
        if self.budget.max_evaluations == 0 {
            return Err(Error::Plan("budget must be positive".into()));
        }
        for c in &self.characteristics {
            if *c != c.name.spec() {
                return Err(Error::Plan(format!("{} does not match its table row", c.name)));
            }
        }
        Ok(())
    }

    /// `ceil(count * scale)`, at least 1.
    pub fn scaled(&self, count: usize) -> usize {
        ((count as f64 * self.scale - 1e-9).ceil() as usize).max(1)
    }

    pub fn tuning_landscapes(&self) -> usize {
        self.scaled(self.tuning_landscapes_per_value)
    }

    pub fn comparison_landscapes(&self) -> usize {
        self.scaled(self.comparison_landscapes_per_value)
    }

    pub fn repetitions(&self) -> usize {
        self.scaled(self.repetitions_per_landscape)
    }

    /// Hash of every field that influences results; the algorithm and
    /// characteristic filters are excluded since outputs are per cell.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.algorithms.clear();
        canonical.characteristics.clear();
        format!("P{:016x}", hash_bytes(canonical.to_toml().as_bytes()))
    }

    fn root(&self) -> SeedPath {
        SeedPath::root(self.master_seed)
    }

    pub fn landscape_seed(&self, ch: Characteristic, value: f64, role: LandscapeRole, index: usize) -> u64 {
        self.root()
            .child_str("landscape")
            .child_str(ch.as_str())
            .child_f64(value)
            .child_str(role.as_str())
            .child(index as u64)
            .seed()
    }

    /// Shared by the untuned and tuned run of a pair.
    pub fn run_seed(&self, alg: AlgorithmId, ch: Characteristic, value: f64, landscape: usize, rep: usize) -> u64 {
        self.root()
            .child_str("run")
            .child_str(alg.as_str())
            .child_str(ch.as_str())
            .child_f64(value)
            .child(landscape as u64)
            .child(rep as u64)
            .seed()
    }

    fn race_path(&self, alg: AlgorithmId, ch: Characteristic, value: f64) -> SeedPath {
        self.root()
            .child_str("race")
            .child_str(alg.as_str())
            .child_str(ch.as_str())
            .child_f64(value)
    }

    fn candidate_seed(&self, alg: AlgorithmId) -> u64 {
        self.root().child_str("candidates").child_str(alg.as_str()).seed()
    }

    pub fn landscape_specs(&self, ch: Characteristic, value: f64, role: LandscapeRole) -> Result<Vec<LandscapeSpec>> {
        let count = match role {
            LandscapeRole::Tuning => self.tuning_landscapes(),
            LandscapeRole::Comparison => self.comparison_landscapes(),
        };
        (0..count)
            .map(|i| landscape_spec_for(ch, value, self.landscape_seed(ch, value, role, i)))
            .collect()
    }
}

/// Winner of one per-value race together with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedRecord {
    pub algorithm: AlgorithmId,
    pub characteristic: Characteristic,
    pub value: f64,
    pub configuration: Configuration,
    pub candidates: usize,
    pub blocks_used: usize,
    pub survivors_at_end: usize,
    pub runs: usize,
    pub plan: String,
}

impl TunedRecord {
    pub fn to_text(&self) -> String {
        format!(
            "# tuned configuration\nalgorithm = {}\ncharacteristic = {}\nvalue = {}\nplan = {}\n\
             candidates = {}\nblocks_used = {}\nsurvivors_at_end = {}\nruns = {}\n{}",
            self.algorithm,
            self.characteristic,
            self.value,
            self.plan,
            self.candidates,
            self.blocks_used,
            self.survivors_at_end,
            self.runs,
            self.configuration.to_text()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let split = text
            .find("\n[")
            .ok_or_else(|| Error::parse("tuned record", "no configuration block"))?;
        let (head, body) = text.split_at(split + 1);
        let mut fields = HashMap::new();
        for line in head.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("tuned record", format!("bad line '{line}'")))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| Error::parse("tuned record", format!("missing '{k}'")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::parse("tuned record", format!("bad '{k}'")))
        };
        let mut configs = Configuration::parse_blocks(body)?;
        if configs.len() != 1 {
            return Err(Error::parse("tuned record", "expected exactly one configuration"));
        }
        Ok(TunedRecord {
            algorithm: get("algorithm")?.parse()?,
            characteristic: get("characteristic")?.parse()?,
            value: get("value")?
                .parse()
                .map_err(|_| Error::parse("tuned record", "bad 'value'"))?,
            configuration: configs.remove(0),
            candidates: num("candidates")?,
            blocks_used: num("blocks_used")?,
            survivors_at_end: num("survivors_at_end")?,
            runs: num("runs")?,
            plan: get("plan")?,
        })
    }
}

/// Paired outcome of one (algorithm, characteristic) sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub untuned: RobustnessSummary,
    pub tuned: RobustnessSummary,
    pub untuned_runs: Vec<(f64, RunRecord)>,
    pub tuned_runs: Vec<(f64, RunRecord)>,
}

type LandscapeKey = (Characteristic, usize, LandscapeRole);

/// Runs the experiment described by a plan, optionally persisting every
/// artifact under an output directory.
pub struct Experiment<'a, R: Runner + ?Sized> {
    plan: &'a ExperimentPlan,
    runner: &'a R,
    out: Option<PathBuf>,
    progress: Option<&'a (dyn Fn(&str) + Sync)>,
    landscapes: Mutex<HashMap<LandscapeKey, Arc<Vec<Landscape>>>>,
}

impl<'a, R: Runner + ?Sized> Experiment<'a, R> {
    pub fn new(plan: &'a ExperimentPlan, runner: &'a R) -> Self {
        Experiment {
            plan,
            runner,
            out: None,
            progress: None,
            landscapes: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_output(mut self, dir: impl Into<PathBuf>) -> Self {
        self.out = Some(dir.into());
        self
    }

    pub fn with_progress(mut self, progress: &'a (dyn Fn(&str) + Sync)) -> Self {
        self.progress = Some(progress);
        self
    }

    pub fn plan(&self) -> &ExperimentPlan {
        self.plan
    }

    fn report(&self, line: &str) {
        if let Some(p) = self.progress {
            p(line);
        }
    }

    pub fn landscapes(&self, ch: Characteristic, value: f64, role: LandscapeRole) -> Result<Arc<Vec<Landscape>>> {
        let key = (ch, value_index(ch, value)?, role);
        if let Some(set) = self.landscapes.lock().expect("landscape cache poisoned").get(&key) {
            return Ok(Arc::clone(set));
        }
        let set: Vec<Landscape> = self
            .plan
            .landscape_specs(ch, value, role)?
            .par_iter()
            .map(Landscape::generate)
            .collect::<Result<_>>()?;
        let set = Arc::new(set);
        self.landscapes
            .lock()
            .expect("landscape cache poisoned")
            .insert(key, Arc::clone(&set));
        Ok(set)
    }

    /// Writes every tuning and comparison landscape of the plan; returns the
    /// number of files written.
    pub fn generate_landscapes(&self) -> Result<usize> {
        let out = self.require_out()?;
        let mut written = 0;
        for spec in &self.plan.characteristics {
            for value in sweep_values(spec) {
                for role in [LandscapeRole::Tuning, LandscapeRole::Comparison] {
                    let dir = out.join("landscapes").join(spec.name.as_str()).join(value.to_string());
                    for (i, l) in self.landscapes(spec.name, value, role)?.iter().enumerate() {
                        write_atomic(&dir.join(format!("{}_{i:03}.toml", role.as_str())), &l.to_text())?;
                        written += 1;
                    }
                }
            }
            self.report(&format!("generated landscapes for {}", spec.name));
        }
        Ok(written)
    }

    fn require_out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("no output directory configured".into()))
    }

    fn tuned_path(&self, alg: AlgorithmId, ch: Characteristic, value: f64) -> Option<PathBuf> {
        self.out
            .as_ref()
            .map(|o| o.join("tuned").join(format!("{alg}_{ch}_{value}.txt")))
    }

    /// Races the candidate grid on the tuning landscapes of one sweep value.
    /// A persisted winner from an identical plan is reused.
    pub fn tune_for_value(&self, alg: AlgorithmId, ch: Characteristic, value: f64) -> Result<TunedRecord> {
        let value = sweep_values(&ch.spec())[value_index(ch, value)?];
        let fingerprint = self.plan.fingerprint();
        let path = self.tuned_path(alg, ch, value);
        if let Some(path) = &path {
            if let Ok(text) = fs::read_to_string(path) {
                if let Ok(record) = TunedRecord::from_text(&text) {
                    if record.plan == fingerprint && record.algorithm == alg {
                        return Ok(record);
                    }
                }
            }
        }

        let candidates = enumerate_candidates(
            alg,
            parameter_space(alg),
            self.plan.race.max_candidates,
            self.plan.candidate_seed(alg),
        )?;
        let landscapes = self.landscapes(ch, value, LandscapeRole::Tuning)?;
        let race_path = self.plan.race_path(alg, ch, value);
        let instances = (0..).map(|b| (&landscapes[b % landscapes.len()], block_seed(race_path, b)));
        let settings = RaceSettings {
            alpha: self.plan.race.alpha,
            min_blocks: self.plan.race.min_blocks,
            race_budget: self.plan.race.runs_per_candidate * candidates.candidates.len(),
            budget: self.plan.budget,
        };
        let outcome = tuner::frace(self.runner, &candidates, instances, settings)?;
        let record = TunedRecord {
            algorithm: alg,
            characteristic: ch,
            value,
            configuration: outcome.winner,
            candidates: candidates.candidates.len(),
            blocks_used: outcome.blocks_used,
            survivors_at_end: outcome.survivors_at_end,
            runs: outcome.runs,
            plan: fingerprint,
        };
        if let Some(path) = &path {
            write_atomic(path, &record.to_text())?;
        }
        self.report(&format!(
            "tuned {alg} {ch}={value}: {} blocks, {} survivors, winner {}",
            record.blocks_used,
            record.survivors_at_end,
            record.configuration.id()
        ));
        Ok(record)
    }

    /// Tunes every (algorithm, characteristic, value) of the plan.
    pub fn tune_all(&self) -> Result<Vec<TunedRecord>> {
        let mut records = Vec::new();
        for spec in &self.plan.characteristics {
            for &alg in &self.plan.algorithms {
                for value in sweep_values(spec) {
                    records.push(self.tune_for_value(alg, spec.name, value)?);
                }
            }
        }
        Ok(records)
    }

    /// Untuned and tuned runs of one algorithm over one sweep, on identical
    /// (landscape, seed) grids.
    pub fn compare(&self, alg: AlgorithmId, ch: Characteristic) -> Result<Comparison> {
        let mut per_value = [Vec::new(), Vec::new()];
        let mut runs = [Vec::new(), Vec::new()];
        let reps = self.plan.repetitions();
        for value in sweep_values(&ch.spec()) {
            let tuned = self.tune_for_value(alg, ch, value)?.configuration;
            let landscapes = self.landscapes(ch, value, LandscapeRole::Comparison)?;
            let untuned = default_configuration_for(alg, landscapes[0].dimensions());
            let grid: Vec<(usize, usize, usize)> = (0..2)
                .flat_map(|flag| (0..landscapes.len()).flat_map(move |l| (0..reps).map(move |r| (flag, l, r))))
                .collect();
            let records: Vec<RunRecord> = grid
                .par_iter()
                .map(|&(flag, l, r)| {
                    let config = if flag == 0 { &untuned } else { &tuned };
                    let seed = self.plan.run_seed(alg, ch, value, l, r);
                    self.runner.run(config, &landscapes[l], self.plan.budget, seed)
                })
                .collect::<Result<_>>()?;
            let (u, t) = records.split_at(records.len() / 2);
            for (flag, recs) in [u, t].into_iter().enumerate() {
                per_value[flag].push(ValueErrorSummary {
                    characteristic: ch,
                    value,
                    algorithm: alg,
                    tuned: flag == 1,
                    average_error: average_error(recs)?,
                    n_runs: recs.len(),
                });
                runs[flag].extend(recs.iter().cloned().map(|r| (value, r)));
            }
            let running = |flag: usize| {
                per_value[flag].iter().map(|v: &ValueErrorSummary| v.average_error).sum::<f64>()
                    / per_value[flag].len() as f64
            };
            self.report(&format!(
                "{alg} {ch}={value}: untuned {:.6} tuned {:.6} (running mean untuned {:.6} tuned {:.6})",
                per_value[0].last().map_or(0.0, |v| v.average_error),
                per_value[1].last().map_or(0.0, |v| v.average_error),
                running(0),
                running(1)
            ));
        }
        let [pu, pt] = per_value;
        let [ru, rt] = runs;
        let comparison = Comparison {
            untuned: RobustnessSummary::from_values(pu)?,
            tuned: RobustnessSummary::from_values(pt)?,
            untuned_runs: ru,
            tuned_runs: rt,
        };
        if let Some(out) = &self.out {
            persist_comparison(out, &self.plan.fingerprint(), &comparison)?;
        }
        Ok(comparison)
    }

    /// Every (algorithm, characteristic) pair of the plan, untuned row first.
    /// Cells already persisted under the same plan are loaded, not rerun.
    pub fn full_experiment(&self) -> Result<Vec<RobustnessSummary>> {
        self.plan.validate()?;
        if let Some(out) = &self.out {
            write_atomic(&out.join("plan.toml"), &self.plan.to_toml())?;
        }
        let fingerprint = self.plan.fingerprint();
        let mut rows = Vec::new();
        for spec in &self.plan.characteristics {
            for &alg in &self.plan.algorithms {
                let cached = self
                    .out
                    .as_ref()
                    .and_then(|out| load_cell(out, alg, spec.name, &fingerprint).ok());
                let (untuned, tuned) = match cached {
                    Some(pair) => {
                        self.report(&format!("{alg} {}: reusing persisted results", spec.name));
                        pair
                    }
                    None => {
                        let c = self.compare(alg, spec.name)?;
                        (c.untuned, c.tuned)
                    }
                };
                rows.push(untuned);
                rows.push(tuned);
            }
        }
        Ok(rows)
    }
}

fn cell_path(out: &Path, alg: AlgorithmId, ch: Characteristic) -> PathBuf {
    out.join("cells").join(format!("{alg}_{ch}.csv"))
}

/// Run-level CSV for one (algorithm, characteristic, flag).
pub fn runs_path(out: &Path, alg: AlgorithmId, ch: Characteristic, tuned: bool) -> PathBuf {
    let flag = if tuned { "tuned" } else { "untuned" };
    out.join("runs").join(format!("{alg}_{ch}_{flag}.csv"))
}

const CELL_HEADER: &str = "characteristic,value,tuned,average_error,n_runs";

fn persist_comparison(out: &Path, fingerprint: &str, c: &Comparison) -> Result<()> {
    let alg = c.untuned.algorithm;
    let ch = c.untuned.characteristic;
    for (tuned, runs) in [(false, &c.untuned_runs), (true, &c.tuned_runs)] {
        let mut text = format!("value,{}\n", RunRecord::CSV_HEADER);
        for (value, r) in runs {
            text.push_str(&format!("{value},{}\n", r.csv_row()));
        }
        write_atomic(&runs_path(out, alg, ch, tuned), &text)?;
    }
    // the cell file is written last: its presence marks the cell complete
    let mut text = format!("# plan {fingerprint}\n{CELL_HEADER}\n");
    for v in c.untuned.per_value.iter().chain(&c.tuned.per_value) {
        text.push_str(&format!(
            "{},{},{},{:?},{}\n",
            v.characteristic, v.value, v.tuned, v.average_error, v.n_runs
        ));
    }
    write_atomic(&cell_path(out, alg, ch), &text)
}

fn load_cell(
    out: &Path,
    alg: AlgorithmId,
    ch: Characteristic,
    fingerprint: &str,
) -> Result<(RobustnessSummary, RobustnessSummary)> {
    let path = cell_path(out, alg, ch);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let context = path.display().to_string();
    let mut lines = text.lines();
    let plan = lines
        .next()
        .and_then(|l| l.strip_prefix("# plan "))
        .ok_or_else(|| Error::parse(&context, "missing plan line"))?;
    if plan != fingerprint {
        return Err(Error::parse(&context, "written by a different plan"));
    }
    if lines.next() != Some(CELL_HEADER) {
        return Err(Error::parse(&context, "bad header"));
    }
    let mut per_value = [Vec::new(), Vec::new()];
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::parse(&context, format!("bad row '{line}'"));
        if f.len() != 5 || f[0].parse::<Characteristic>()? != ch {
            return Err(bad());
        }
        let tuned: bool = f[2].parse().map_err(|_| bad())?;
        per_value[tuned as usize].push(ValueErrorSummary {
            characteristic: ch,
            value: f[1].parse().map_err(|_| bad())?,
            algorithm: alg,
            tuned,
            average_error: f[3].parse().map_err(|_| bad())?,
            n_runs: f[4].parse().map_err(|_| bad())?,
        });
    }
    let expected = sweep_values(&ch.spec()).len();
    if per_value.iter().any(|v| v.len() != expected) {
        return Err(Error::parse(&context, "incomplete cell"));
    }
    let [u, t] = per_value;
    Ok((RobustnessSummary::from_values(u)?, RobustnessSummary::from_values(t)?))
}

/// Loads the persisted summaries of every (algorithm, characteristic) in the
/// plan, failing with [`Error::MissingSummaries`] if any cell is absent.
pub fn load_summaries(out: &Path, plan: &ExperimentPlan) -> Result<Vec<RobustnessSummary>> {
    let fingerprint = plan.fingerprint();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for spec in &plan.characteristics {
        for &alg in &plan.algorithms {
            match load_cell(out, alg, spec.name, &fingerprint) {
                Ok((u, t)) => rows.extend([u, t]),
                Err(_) => missing.push(format!("{alg}/{}", spec.name)),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSummaries(format!(
            "no comparison results under {} for {}; run `compare` first",
            out.display(),
            missing.join(", ")
        )));
    }
    Ok(rows)
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
