//! F-Race: racing a finite set of configurations over a stream of instances.
//!
//! Each block runs every surviving candidate once on the same landscape with
//! the same seed. From `min_blocks` onwards, a Friedman test over the blocks
//! seen so far gates a pairwise rank-sum post-test that drops every candidate
//! significantly worse than the current best.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::optimizers::{optimize, AlgorithmId, Budget, Configuration, ParameterDescriptor, RunRecord};
use crate::seed::{self, SeedPath};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MIN_BLOCKS: usize = 5;
pub const DEFAULT_MAX_CANDIDATES: usize = 200;
/// Default race budget, in optimizer runs per candidate.
pub const DEFAULT_RUNS_PER_CANDIDATE: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub algorithm: AlgorithmId,
    pub candidates: Vec<Configuration>,
}

/// Full factorial product of the grids, subsampled to `max_candidates` with a
/// randomly shifted Halton sequence when the product is larger.
pub fn enumerate_candidates(
    algorithm: AlgorithmId,
    space: &[ParameterDescriptor],
    max_candidates: usize,
    seed: u64,
) -> Result<CandidateSet> {
    if space.is_empty() {
        return Err(Error::InvalidInput("empty parameter space".into()));
    }
    if max_candidates == 0 {
        return Err(Error::InvalidInput("max_candidates must be positive".into()));
    }
    if let Some(d) = space.iter().find(|d| d.grid.is_empty()) {
        return Err(Error::InvalidInput(format!("parameter '{}' has an empty grid", d.name)));
    }
    let radices: Vec<usize> = space.iter().map(|d| d.grid.len()).collect();
    let total = radices
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .unwrap_or(usize::MAX);

    let indices: Vec<Vec<usize>> = if total <= max_candidates {
        (0..total).map(|flat| unflatten(flat, &radices)).collect()
    } else {
        halton_grid_sample(&radices, max_candidates, seed)
    };

    let mut candidates: Vec<Configuration> = Vec::with_capacity(indices.len());
    for idx in indices {
        let values = space
            .iter()
            .zip(&idx)
            .map(|(d, &i)| (d.name.to_string(), d.grid[i]))
            .collect();
        // grids may contain combinations the algorithm rejects; skip those
        if let Ok(config) = Configuration::new(algorithm, values) {
            if !candidates.contains(&config) {
                candidates.push(config);
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput(format!("no valid {algorithm} candidate in the grid")));
    }
    Ok(CandidateSet { algorithm, candidates })
}

fn unflatten(mut flat: usize, radices: &[usize]) -> Vec<usize> {
    radices
        .iter()
        .map(|&r| {
            let i = flat % r;
            flat /= r;
            i
        })
        .collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * scale;
        n /= base;
        scale *= inv;
    }
    out
}

fn halton_grid_sample(radices: &[usize], count: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng as _;
    assert!(radices.len() <= PRIMES.len(), "too many parameters for the Halton bases");
    let mut rng = seed::rng(seed);
    let shift: Vec<f64> = radices.iter().map(|_| rng.random::<f64>()).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut n = 1u64;
    while out.len() < count && n < 1_000_000 {
        let idx: Vec<usize> = radices
            .iter()
            .zip(&shift)
            .zip(PRIMES)
            .map(|((&r, &s), p)| {
                let u = (radical_inverse(n, p) + s).fract();
                ((u * r as f64) as usize).min(r - 1)
            })
            .collect();
        if seen.insert(idx.clone()) {
            out.push(idx);
        }
        n += 1;
    }
    out
}

/// Ranks within one block, 1 = lowest error, ties sharing their average rank.
pub fn rank_block(errors: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]));
    let mut ranks = vec![0.0; errors.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && errors[order[j + 1]] == errors[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Rank sums per candidate column.
    pub rank_sums: Vec<f64>,
    /// Sum of squared ranks over the whole matrix.
    pub sum_sq_ranks: f64,
}

impl FriedmanResult {
    pub fn mean_ranks(&self, blocks: usize) -> Vec<f64> {
        self.rank_sums.iter().map(|r| r / blocks as f64).collect()
    }
}

/// Friedman rank test on a blocks-by-candidates matrix of errors.
pub fn friedman(results: &[Vec<f64>]) -> Result<FriedmanResult> {
    let b = results.len();
    if b < 2 {
        return Err(Error::InvalidInput(format!("friedman needs at least 2 blocks, got {b}")));
    }
    let k = results[0].len();
    if k < 2 {
        return Err(Error::InvalidInput(format!("friedman needs at least 2 candidates, got {k}")));
    }
    if results.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidInput("ragged result matrix".into()));
    }
    if results.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in result matrix".into()));
    }
    let mut rank_sums = vec![0.0; k];
    let mut sum_sq_ranks = 0.0;
    for row in results {
        for (j, r) in rank_block(row).into_iter().enumerate() {
            rank_sums[j] += r;
            sum_sq_ranks += r * r;
        }
    }
    let (bf, kf) = (b as f64, k as f64);
    let centre = (kf + 1.0) / 2.0;
    let dev: f64 = rank_sums.iter().map(|r| (r / bf - centre).powi(2)).sum();
    let statistic = 12.0 * bf / (kf * (kf + 1.0)) * dev;
    let chi2 = ChiSquared::new(kf - 1.0).expect("k >= 2");
    let p_value = chi2.sf(statistic).clamp(0.0, 1.0);
    Ok(FriedmanResult {
        statistic,
        p_value,
        rank_sums,
        sum_sq_ranks,
    })
}

/// Candidates whose rank sum exceeds the best one's by more than the
/// post-test threshold, given a significant Friedman result.
pub fn post_test_losers(fr: &FriedmanResult, blocks: usize, alpha: f64) -> Vec<usize> {
    let k = fr.rank_sums.len();
    let (bf, kf) = (blocks as f64, k as f64);
    let df = (bf - 1.0) * (kf - 1.0);
    let t = StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(1.0 - alpha / 2.0);
    let spread = (fr.sum_sq_ranks - bf * kf * (kf + 1.0).powi(2) / 4.0).max(0.0);
    let agreement = (1.0 - fr.statistic / (bf * (kf - 1.0))).max(0.0);
    let threshold = t * (2.0 * bf * agreement * spread / df).sqrt();
    let best = best_by_rank(&fr.rank_sums);
    (0..k)
        .filter(|&j| j != best && fr.rank_sums[j] - fr.rank_sums[best] > threshold)
        .collect()
}

fn best_by_rank(rank_sums: &[f64]) -> usize {
    (0..rank_sums.len()).fold(0, |best, j| if rank_sums[j] < rank_sums[best] { j } else { best })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceState {
    /// Indices into the candidate list, ascending.
    pub surviving: Vec<usize>,
    /// One row per block; `None` for candidates eliminated before the block.
    pub results: Vec<Vec<Option<f64>>>,
    pub blocks_done: usize,
    pub evaluations_spent: usize,
}

impl RaceState {
    pub fn new(candidates: usize) -> Self {
        RaceState {
            surviving: (0..candidates).collect(),
            results: Vec::new(),
            blocks_done: 0,
            evaluations_spent: 0,
        }
    }

    /// Blocks-by-survivors submatrix.
    pub fn survivor_matrix(&self) -> Vec<Vec<f64>> {
        self.results
            .iter()
            .map(|row| {
                self.surviving
                    .iter()
                    .map(|&j| row[j].expect("survivors have a result in every block"))
                    .collect()
            })
            .collect()
    }
}

/// Applies one Friedman-gated elimination round; returns the eliminated
/// candidate indices.
pub fn eliminate(state: &mut RaceState, alpha: f64, min_blocks: usize) -> Result<Vec<usize>> {
    if state.blocks_done < min_blocks {
        return Err(Error::Race(format!(
            "elimination needs {min_blocks} blocks, only {} done",
            state.blocks_done
        )));
    }
    if state.surviving.len() < 2 {
        return Err(Error::Race("elimination needs at least two survivors".into()));
    }
    let fr = friedman(&state.survivor_matrix())?;
    if fr.p_value > alpha {
        return Ok(Vec::new());
    }
    let losers: Vec<usize> = post_test_losers(&fr, state.blocks_done, alpha)
        .into_iter()
        .map(|j| state.surviving[j])
        .collect();
    state.surviving.retain(|j| !losers.contains(j));
    Ok(losers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceOutcome {
    pub winner: Configuration,
    pub winner_index: usize,
    pub blocks_used: usize,
    pub survivors_at_end: usize,
    pub runs: usize,
    pub elimination_log: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceSettings {
    pub alpha: f64,
    pub min_blocks: usize,
    /// Maximum number of optimizer runs in the whole race.
    pub race_budget: usize,
    pub budget: Budget,
}

impl RaceSettings {
    pub fn for_candidates(candidates: usize, budget: Budget) -> Self {
        RaceSettings {
            alpha: DEFAULT_ALPHA,
            min_blocks: DEFAULT_MIN_BLOCKS,
            race_budget: DEFAULT_RUNS_PER_CANDIDATE * candidates,
            budget,
        }
    }
}

/// Executes one configuration on one landscape.
pub trait Runner: Sync {
    fn run(&self, config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<RunRecord>;

    fn error(&self, config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<f64> {
        Ok(self.run(config, landscape, budget, seed)?.error)
    }
}

/// Runs the real optimizers.
#[derive(Debug, Clone, Copy, Default)]
pub struct OptimizerRunner;

impl Runner for OptimizerRunner {
    fn run(&self, config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<RunRecord> {
        optimize(config, landscape, budget, seed)
    }
}

/// Synthetic objectives: the closure returns the error directly.
impl<F> Runner for F
where
    F: Fn(&Configuration, &Landscape, Budget, u64) -> Result<f64> + Sync,
{
    fn run(&self, config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<RunRecord> {
        let error = self(config, landscape, budget, seed)?;
        Ok(RunRecord {
            algorithm: config.algorithm(),
            configuration: config.clone(),
            landscape_id: landscape.id().to_string(),
            seed,
            best_x: Vec::new(),
            best_fitness: 1.0 - error,
            error,
            evaluations_used: 0,
        })
    }

    fn error(&self, config: &Configuration, landscape: &Landscape, budget: Budget, seed: u64) -> Result<f64> {
        self(config, landscape, budget, seed)
    }
}

/// Races `candidates` over `instances`, one `(landscape, seed)` per block.
pub fn frace<'a, R, I>(
    runner: &R,
    candidates: &CandidateSet,
    instances: I,
    settings: RaceSettings,
) -> Result<RaceOutcome>
where
    R: Runner + ?Sized,
    I: IntoIterator<Item = (&'a Landscape, u64)>,
{
    let k = candidates.candidates.len();
    if k == 0 {
        return Err(Error::Race("empty candidate set".into()));
    }
    if k == 1 {
        return Ok(RaceOutcome {
            winner: candidates.candidates[0].clone(),
            winner_index: 0,
            blocks_used: 0,
            survivors_at_end: 1,
            runs: 0,
            elimination_log: Vec::new(),
        });
    }
    let min_blocks = settings.min_blocks.max(1);
    if settings.race_budget < min_blocks * k {
        return Err(Error::Race(format!(
            "race budget {} is below {min_blocks} blocks x {k} candidates",
            settings.race_budget
        )));
    }

    let mut state = RaceState::new(k);
    let mut runs = 0usize;
    let mut log = Vec::new();
    for (landscape, seed) in instances {
        if runs + state.surviving.len() > settings.race_budget {
            break;
        }
        let errors: Vec<(usize, f64)> = state
            .surviving
            .par_iter()
            .map(|&j| {
                runner
                    .error(&candidates.candidates[j], landscape, settings.budget, seed)
                    .map(|e| (j, e))
            })
            .collect::<Result<_>>()?;
        let mut row = vec![None; k];
        for (j, e) in errors {
            row[j] = Some(e);
        }
        runs += state.surviving.len();
        state.evaluations_spent += state.surviving.len() * settings.budget.max_evaluations;
        state.results.push(row);
        state.blocks_done += 1;

        if state.blocks_done >= min_blocks && state.surviving.len() >= 2 {
            let gone = eliminate(&mut state, settings.alpha, min_blocks)?;
            if !gone.is_empty() {
                log.push((state.blocks_done - 1, gone));
            }
        }
        if state.surviving.len() == 1 {
            break;
        }
    }
    if state.blocks_done == 0 {
        return Err(Error::Race("instance stream is empty".into()));
    }

    let winner_index = select_winner(&state);
    Ok(RaceOutcome {
        winner: candidates.candidates[winner_index].clone(),
        winner_index,
        blocks_used: state.blocks_done,
        survivors_at_end: state.surviving.len(),
        runs,
        elimination_log: log,
    })
}

/// Best mean rank among survivors, then lowest mean error, then lowest index.
fn select_winner(state: &RaceState) -> usize {
    let matrix = state.survivor_matrix();
    let n = state.surviving.len();
    let mut rank_sums = vec![0.0; n];
    let mut error_sums = vec![0.0; n];
    for row in &matrix {
        for (j, r) in rank_block(row).into_iter().enumerate() {
            rank_sums[j] += r;
            error_sums[j] += row[j];
        }
    }
    let mut best = 0;
    for j in 1..n {
        let better = match rank_sums[j].total_cmp(&rank_sums[best]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => error_sums[j] < error_sums[best],
            std::cmp::Ordering::Greater => false,
        };
        if better {
            best = j;
        }
    }
    state.surviving[best]
}

/// Seed for block `index` of a race rooted at `path`.
pub fn block_seed(path: SeedPath, index: usize) -> u64 {
    path.child(index as u64).seed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::parameter_space;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(rank_block(&[0.3, 0.1, 0.2]), vec![3.0, 1.0, 2.0]);
        assert_eq!(rank_block(&[0.5, 0.5, 0.1, 0.5]), vec![3.0, 3.0, 1.0, 3.0]);
    }

    #[test]
    fn friedman_unanimous_case() {
        let m = vec![vec![0.1, 0.2, 0.3]; 5];
        let fr = friedman(&m).unwrap();
        assert!((fr.statistic - 10.0).abs() < 1e-12);
        assert!((fr.p_value - (-5.0f64).exp()).abs() < 1e-9);
        assert!((fr.p_value - 0.0067).abs() < 1e-4);
        assert_eq!(fr.mean_ranks(5), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn friedman_identical_columns() {
        let m = vec![vec![0.4, 0.4, 0.4]; 6];
        let fr = friedman(&m).unwrap();
        assert_eq!(fr.statistic, 0.0);
        assert_eq!(fr.p_value, 1.0);
    }

    #[test]
    fn friedman_rejects_bad_input() {
        assert!(friedman(&[vec![0.1, 0.2]]).is_err());
        assert!(friedman(&[vec![0.1], vec![0.2]]).is_err());
        assert!(friedman(&[vec![0.1, 0.2], vec![0.1]]).is_err());
        assert!(friedman(&[vec![0.1, f64::NAN], vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn unanimous_case_eliminates_the_worst() {
        let mut state = RaceState::new(3);
        state.results = vec![vec![Some(0.1), Some(0.2), Some(0.3)]; 5];
        state.blocks_done = 5;
        let gone = eliminate(&mut state, 0.05, 5).unwrap();
        assert!(gone.contains(&2));
        assert!(state.surviving.contains(&0));
    }

    #[test]
    fn insignificant_race_is_unchanged() {
        let mut state = RaceState::new(3);
        state.results = vec![
            vec![Some(0.1), Some(0.2), Some(0.3)],
            vec![Some(0.3), Some(0.1), Some(0.2)],
            vec![Some(0.2), Some(0.3), Some(0.1)],
            vec![Some(0.1), Some(0.3), Some(0.2)],
            vec![Some(0.2), Some(0.1), Some(0.3)],
        ];
        state.blocks_done = 5;
        let before = state.clone();
        assert!(eliminate(&mut state, 0.05, 5).unwrap().is_empty());
        assert_eq!(state, before);
    }

    #[test]
    fn identical_columns_survive_any_alpha() {
        let mut state = RaceState::new(2);
        state.results = (0..8).map(|i| vec![Some(i as f64 * 0.1), Some(i as f64 * 0.1)]).collect();
        state.blocks_done = 8;
        for alpha in [0.01, 0.05, 0.5, 1.0] {
            assert!(eliminate(&mut state, alpha, 5).unwrap().is_empty());
        }
        assert_eq!(state.surviving, vec![0, 1]);
    }

    #[test]
    fn eliminate_checks_preconditions() {
        let mut state = RaceState::new(3);
        state.results = vec![vec![Some(0.1), Some(0.2), Some(0.3)]; 4];
        state.blocks_done = 4;
        assert!(eliminate(&mut state, 0.05, 5).is_err());
        let mut single = RaceState::new(1);
        single.blocks_done = 6;
        assert!(eliminate(&mut single, 0.05, 5).is_err());
    }

    #[test]
    fn candidate_counts() {
        let shc = enumerate_candidates(AlgorithmId::Shc, parameter_space(AlgorithmId::Shc), 200, 1).unwrap();
        assert_eq!(shc.candidates.len(), 5);
        let es = enumerate_candidates(AlgorithmId::Es, parameter_space(AlgorithmId::Es), 200, 1).unwrap();
        assert_eq!(es.candidates.len(), 16);
        let ga = enumerate_candidates(AlgorithmId::Ga, parameter_space(AlgorithmId::Ga), 200, 9).unwrap();
        assert_eq!(ga.candidates.len(), 200);
        let again = enumerate_candidates(AlgorithmId::Ga, parameter_space(AlgorithmId::Ga), 200, 9).unwrap();
        assert_eq!(ga, again);
        assert!(enumerate_candidates(AlgorithmId::Ga, &[], 200, 9).is_err());
    }

    #[test]
    fn subsample_covers_every_grid_value() {
        let space = parameter_space(AlgorithmId::Pso);
        let set = enumerate_candidates(AlgorithmId::Pso, space, 200, 4).unwrap();
        for d in space {
            for &g in d.grid {
                assert!(set.candidates.iter().any(|c| c.get(d.name) == g), "{} = {g} missing", d.name);
            }
        }
    }
}
