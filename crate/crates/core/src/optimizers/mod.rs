//! The seven optimizers behind one budgeted, seedable entry point.
//!
//! Every optimizer maximizes a [`Landscape`] through an [`Evaluator`], which
//! clamps candidates into the domain, counts evaluations against the
//! [`Budget`] and keeps the first-found best point. Algorithms stop as soon as
//! the evaluator refuses a request.

mod bees;
mod bfoa;
mod es;
mod ga;
mod hs;
mod pso;
mod shc;
mod space;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::landscape::{error_of, Landscape};
use crate::seed::{self, hash_bytes, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgorithmId {
    Bfoa,
    Bees,
    Es,
    Ga,
    Hs,
    Pso,
    Shc,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 7] = [
        AlgorithmId::Bfoa,
        AlgorithmId::Bees,
        AlgorithmId::Es,
        AlgorithmId::Ga,
        AlgorithmId::Hs,
        AlgorithmId::Pso,
        AlgorithmId::Shc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Bfoa => "BFOA",
            AlgorithmId::Bees => "BEES",
            AlgorithmId::Es => "ES",
            AlgorithmId::Ga => "GA",
            AlgorithmId::Hs => "HS",
            AlgorithmId::Pso => "PSO",
            AlgorithmId::Shc => "SHC",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            AlgorithmId::Bfoa => "Bacterial Foraging Optimisation",
            AlgorithmId::Bees => "Bees Algorithm",
            AlgorithmId::Es => "Evolution Strategies",
            AlgorithmId::Ga => "Genetic Algorithm",
            AlgorithmId::Hs => "Harmony Search",
            AlgorithmId::Pso => "Particle Swarm Optimisation",
            AlgorithmId::Shc => "Stochastic Hill Climbing",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == upper || (upper == "BA" && *a == AlgorithmId::Bees))
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    Integer,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDescriptor {
    pub name: &'static str,
    pub kind: ParameterKind,
    pub lower: f64,
    pub upper: f64,
    pub default: f64,
    /// Candidate values offered to the tuner.
    pub grid: &'static [f64],
}

impl ParameterDescriptor {
    pub fn admits(&self, value: f64) -> bool {
        value.is_finite()
            && value >= self.lower
            && value <= self.upper
            && (self.kind == ParameterKind::Real || value.fract() == 0.0)
    }
}

pub fn parameter_space(algorithm: AlgorithmId) -> &'static [ParameterDescriptor] {
    space::descriptors(algorithm)
}

/// Out-of-the-box configuration. GA's mutation rate assumes two dimensions;
/// use [`default_configuration_for`] when the dimensionality is known.
pub fn default_configuration(algorithm: AlgorithmId) -> Configuration {
    let values = parameter_space(algorithm)
        .iter()
        .map(|d| (d.name.to_string(), d.default))
        .collect();
    Configuration { algorithm, values }
}

/// Default configuration with dimension-dependent defaults resolved.
pub fn default_configuration_for(algorithm: AlgorithmId, dimensions: usize) -> Configuration {
    let mut config = default_configuration(algorithm);
    if algorithm == AlgorithmId::Ga {
        let bits = config.get("bits");
        config
            .values
            .insert("mutation".into(), 1.0 / (bits * dimensions.max(1) as f64));
    }
    config
}

/// A complete parameter assignment for one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    algorithm: AlgorithmId,
    values: BTreeMap<String, f64>,
}

impl Configuration {
    pub fn new(algorithm: AlgorithmId, values: BTreeMap<String, f64>) -> Result<Self> {
        let config = Configuration { algorithm, values };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let space = parameter_space(self.algorithm);
        if self.values.len() != space.len() {
            return Err(Error::InvalidConfiguration(format!(
                "{} expects {} parameters, got {}",
                self.algorithm,
                space.len(),
                self.values.len()
            )));
        }
        for d in space {
            let v = self.values.get(d.name).ok_or_else(|| {
                Error::InvalidConfiguration(format!("{} is missing '{}'", self.algorithm, d.name))
            })?;
            if !d.admits(*v) {
                return Err(Error::InvalidConfiguration(format!(
                    "{}.{} = {v} outside [{}, {}]{}",
                    self.algorithm,
                    d.name,
                    d.lower,
                    d.upper,
                    if d.kind == ParameterKind::Integer { " or not integral" } else { "" }
                )));
            }
        }
        if self.algorithm == AlgorithmId::Bees {
            let (scouts, sites, elite) = (self.get("scouts"), self.get("sites"), self.get("elite_sites"));
            if elite > sites || sites >= scouts {
                return Err(Error::InvalidConfiguration(format!(
                    "BEES needs elite_sites <= sites < scouts, got {elite}, {sites}, {scouts}"
                )));
            }
        }
        Ok(())
    }

    pub fn algorithm(&self) -> AlgorithmId {
        self.algorithm
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    /// Value of a parameter that is known to exist.
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub(crate) fn count(&self, name: &str) -> usize {
        self.values[name] as usize
    }

    /// Flat `key = value` block headed by the algorithm id.
    pub fn to_text(&self) -> String {
        let mut out = format!("[{}]\n", self.algorithm);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Parses every block in `text`.
    pub fn parse_blocks(text: &str) -> Result<Vec<Configuration>> {
        let mut configs = Vec::new();
        let mut current: Option<(AlgorithmId, BTreeMap<String, f64>)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some((alg, values)) = current.take() {
                    configs.push(Configuration::new(alg, values)?);
                }
                current = Some((header.parse()?, BTreeMap::new()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("configuration", format!("line {}: expected key = value", lineno + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::parse("configuration", format!("line {}: {e}", lineno + 1)))?;
            let (_, values) = current
                .as_mut()
                .ok_or_else(|| Error::parse("configuration", "value before any [ALGORITHM] header"))?;
            values.insert(key.trim().to_string(), value);
        }
        if let Some((alg, values)) = current {
            configs.push(Configuration::new(alg, values)?);
        }
        Ok(configs)
    }

    /// Short stable identifier derived from the canonical text.
    pub fn id(&self) -> String {
        format!("C{:016x}", seed::mix64(hash_bytes(self.to_text().as_bytes())))
    }

    /// Smallest budget that fits initialization plus one iteration.
    pub fn min_evaluations(&self) -> usize {
        match self.algorithm {
            AlgorithmId::Bfoa => 2 * self.count("population"),
            AlgorithmId::Bees => {
                let scouts = self.count("scouts");
                let sites = self.count("sites");
                let elite = self.count("elite_sites");
                let recruits =
                    elite * self.count("bees_per_elite") + (sites - elite) * self.count("bees_per_site");
                scouts + recruits + (scouts - sites)
            }
            AlgorithmId::Es => self.count("population") + self.count("children"),
            AlgorithmId::Ga => 2 * self.count("population"),
            AlgorithmId::Hs => self.count("memory") + 1,
            AlgorithmId::Pso => 2 * self.count("population"),
            AlgorithmId::Shc => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_evaluations: usize,
}

impl Budget {
    pub const DEFAULT_EVALUATIONS: usize = 20_000;

    pub fn new(max_evaluations: usize) -> Result<Self> {
        if max_evaluations == 0 {
            return Err(Error::InvalidInput("budget must be positive".into()));
        }
        Ok(Budget { max_evaluations })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_evaluations: Self::DEFAULT_EVALUATIONS,
        }
    }
}

/// Outcome of one optimizer execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: AlgorithmId,
    pub configuration: Configuration,
    pub landscape_id: String,
    pub seed: u64,
    pub best_x: Vec<f64>,
    pub best_fitness: f64,
    pub error: f64,
    pub evaluations_used: usize,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str =
        "algorithm,config_id,landscape_id,seed,best_fitness,error,evaluations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.algorithm,
            self.configuration.id(),
            self.landscape_id,
            self.seed,
            self.best_fitness,
            self.error,
            self.evaluations_used
        )
    }
}

/// Budgeted, clamping view of a landscape handed to the algorithms.
pub(crate) struct Evaluator<'a> {
    landscape: &'a Landscape,
    boundary: f64,
    limit: usize,
    used: usize,
    best_x: Vec<f64>,
    best_f: f64,
    observer: Option<Observer<'a>>,
}

impl<'a> Evaluator<'a> {
    fn new(
        landscape: &'a Landscape,
        budget: Budget,
        observer: Option<Observer<'a>>,
    ) -> Self {
        Evaluator {
            landscape,
            boundary: landscape.boundary(),
            limit: budget.max_evaluations,
            used: 0,
            best_x: Vec::new(),
            best_f: f64::NEG_INFINITY,
            observer,
        }
    }

    pub(crate) fn dims(&self) -> usize {
        self.landscape.dimensions()
    }

    pub(crate) fn boundary(&self) -> f64 {
        self.boundary
    }

    /// Clamps `x` into the domain in place and evaluates it. `None` once the
    /// budget is spent.
    pub(crate) fn eval(&mut self, x: &mut [f64]) -> Option<f64> {
        if self.used >= self.limit {
            return None;
        }
        for v in x.iter_mut() {
            *v = v.clamp(0.0, self.boundary);
        }
        self.used += 1;
        let f = self.landscape.evaluate_unchecked(x);
        if f > self.best_f {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
        if let Some(obs) = self.observer.as_mut() {
            obs(x, f);
        }
        Some(f)
    }

    pub(crate) fn random_point(&self, rng: &mut Rng) -> Vec<f64> {
        use rand::Rng as _;
        (0..self.dims())
            .map(|_| rng.random::<f64>() * self.boundary)
            .collect()
    }
}

/// Runs `config` on `landscape` with the given budget and seed.
pub fn optimize(config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<RunRecord> {
    run(config, landscape, budget, seed, None)
}

/// Like [`optimize`], calling `observer` with every evaluated point and its
/// fitness, in order.
pub fn optimize_observed(
    config: &Configuration,
    landscape: &Landscape,
    budget: Budget,
    seed: u64,
    observer: &mut dyn FnMut(&[f64], f64),
) -> Result<RunRecord> {
    run(config, landscape, budget, seed, Some(observer))
}

type Observer<'a> = &'a mut dyn FnMut(&[f64], f64);

fn run<'a>(
    config: &Configuration,
    landscape: &'a Landscape,
    budget: Budget,
    seed: u64,
    observer: Option<Observer<'a>>,
) -> Result<RunRecord> {
    config.validate()?;
    let required = config.min_evaluations();
    if budget.max_evaluations < required {
        return Err(Error::BudgetTooSmall {
            budget: budget.max_evaluations,
            required,
        });
    }
    let mut rng = seed::rng(seed);
    let mut ev = Evaluator::new(landscape, budget, observer);
    let _ = match config.algorithm() {
        AlgorithmId::Bfoa => bfoa::run(&bfoa::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Bees => bees::run(&bees::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Es => es::run(&es::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Ga => ga::run(&ga::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Hs => hs::run(&hs::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Pso => pso::run(&pso::Params::from(config), &mut ev, &mut rng),
        AlgorithmId::Shc => shc::run(&shc::Params::from(config), &mut ev, &mut rng),
    };
    debug_assert!(ev.used > 0);
    let best_fitness = ev.best_f;
    Ok(RunRecord {
        algorithm: config.algorithm(),
        configuration: config.clone(),
        landscape_id: landscape.id().to_string(),
        seed,
        best_x: ev.best_x,
        best_fitness,
        error: error_of(best_fitness)?,
        evaluations_used: ev.used,
    })
}

/// Uniform random sampling with the same budget; the baseline every
/// optimizer should beat.
pub fn random_sampling(landscape: &Landscape, budget: Budget, seed: u64) -> f64 {
    let mut rng = seed::rng(seed);
    let mut ev = Evaluator::new(landscape, budget, None);
    loop {
        let mut x = ev.random_point(&mut rng);
        if ev.eval(&mut x).is_none() {
            break;
        }
    }
    1.0 - ev.best_f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_counts() {
        let counts: Vec<usize> = AlgorithmId::ALL.iter().map(|a| parameter_space(*a).len()).collect();
        assert_eq!(counts, vec![10, 6, 2, 4, 4, 4, 1]);
        assert_eq!(parameter_space(AlgorithmId::Shc)[0].name, "neighborhood_fraction");
    }

    #[test]
    fn descriptors_are_consistent() {
        for alg in AlgorithmId::ALL {
            for d in parameter_space(alg) {
                assert!(d.lower <= d.default && d.default <= d.upper, "{alg}.{}", d.name);
                assert!(!d.grid.is_empty());
                for &g in d.grid {
                    assert!(d.admits(g), "{alg}.{} grid value {g}", d.name);
                }
            }
            default_configuration(alg).validate().unwrap();
            for dims in 1..=10 {
                default_configuration_for(alg, dims).validate().unwrap();
            }
        }
    }

    #[test]
    fn documented_defaults() {
        let pso = default_configuration(AlgorithmId::Pso);
        assert_eq!(pso.get("population"), 30.0);
        assert_eq!(pso.get("max_velocity_fraction"), 0.1);
        assert_eq!(pso.get("personal_bias"), 2.0);
        assert_eq!(pso.get("global_bias"), 2.0);
        assert_eq!(default_configuration(AlgorithmId::Shc).get("neighborhood_fraction"), 0.05);
        let es = default_configuration(AlgorithmId::Es);
        assert_eq!((es.get("population"), es.get("children")), (30.0, 20.0));
        assert_eq!(default_configuration_for(AlgorithmId::Ga, 5).get("mutation"), 1.0 / 80.0);
    }

    #[test]
    fn configuration_text_round_trip() {
        let configs: Vec<Configuration> = AlgorithmId::ALL.iter().map(|a| default_configuration(*a)).collect();
        let text: String = configs.iter().map(|c| c.to_text()).collect::<Vec<_>>().join("\n");
        let back = Configuration::parse_blocks(&text).unwrap();
        assert_eq!(back, configs);
        assert_eq!(back[3].id(), configs[3].id());
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let mut values = default_configuration(AlgorithmId::Pso).values().clone();
        values.insert("population".into(), 2.5);
        assert!(Configuration::new(AlgorithmId::Pso, values.clone()).is_err());
        values.insert("population".into(), 30.0);
        values.insert("extra".into(), 1.0);
        assert!(Configuration::new(AlgorithmId::Pso, values).is_err());
        let mut bees = default_configuration(AlgorithmId::Bees).values().clone();
        bees.insert("elite_sites".into(), 4.0);
        assert!(Configuration::new(AlgorithmId::Bees, bees).is_err());
    }

    #[test]
    fn algorithm_names_parse() {
        for a in AlgorithmId::ALL {
            assert_eq!(a.as_str().parse::<AlgorithmId>().unwrap(), a);
        }
        assert_eq!("ba".parse::<AlgorithmId>().unwrap(), AlgorithmId::Bees);
        assert!("cmaes".parse::<AlgorithmId>().is_err());
    }
}
