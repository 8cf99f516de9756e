//! Robustness statistics: per-value average errors reduced to a mean and a
//! sample standard deviation across a characteristic sweep.

use std::fmt;

use crate::error::{Error, Result};
use crate::harness::Characteristic;
use crate::optimizers::{AlgorithmId, RunRecord};

/// Tuned mu at or below this fraction of untuned mu counts as a benefit.
pub const BENEFIT_RATIO: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueErrorSummary {
    pub characteristic: Characteristic,
    pub value: f64,
    pub algorithm: AlgorithmId,
    pub tuned: bool,
    pub average_error: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessSummary {
    pub characteristic: Characteristic,
    pub algorithm: AlgorithmId,
    pub tuned: bool,
    pub mu: f64,
    pub sigma: f64,
    pub per_value: Vec<ValueErrorSummary>,
}

impl RobustnessSummary {
    pub fn from_values(per_value: Vec<ValueErrorSummary>) -> Result<Self> {
        let first = per_value
            .first()
            .ok_or_else(|| Error::InvalidInput("no per-value summaries".into()))?;
        let (characteristic, algorithm, tuned) = (first.characteristic, first.algorithm, first.tuned);
        if per_value
            .iter()
            .any(|v| v.characteristic != characteristic || v.algorithm != algorithm || v.tuned != tuned)
        {
            return Err(Error::InvalidInput("per-value summaries mix cells".into()));
        }
        let means: Vec<f64> = per_value.iter().map(|v| v.average_error).collect();
        let (mu, sigma) = robustness(&means)?;
        Ok(RobustnessSummary {
            characteristic,
            algorithm,
            tuned,
            mu,
            sigma,
            per_value,
        })
    }
}

/// Mean error of a set of runs of one algorithm.
pub fn average_error(records: &[RunRecord]) -> Result<f64> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidInput("average_error of no runs".into()))?;
    if records.iter().any(|r| r.algorithm != first.algorithm) {
        return Err(Error::InvalidInput("average_error over mixed algorithms".into()));
    }
    Ok(records.iter().map(|r| r.error).sum::<f64>() / records.len() as f64)
}

/// Mean and sample standard deviation (n - 1 denominator).
pub fn robustness(per_value_means: &[f64]) -> Result<(f64, f64)> {
    let n = per_value_means.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("robustness needs at least 2 values, got {n}")));
    }
    let mu = per_value_means.iter().sum::<f64>() / n as f64;
    let ss: f64 = per_value_means.iter().map(|v| (v - mu) * (v - mu)).sum();
    Ok((mu, (ss / (n - 1) as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuningBenefit {
    Never,
    Sometimes,
    Always,
}

impl fmt::Display for TuningBenefit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuningBenefit::Never => "NEVER",
            TuningBenefit::Sometimes => "SOMETIMES",
            TuningBenefit::Always => "ALWAYS",
        })
    }
}

/// Untuned and tuned mu for every characteristic, in [`Characteristic::ALL`]
/// order.
pub fn mu_pairs(summaries: &[RobustnessSummary]) -> Result<Vec<(Characteristic, f64, f64)>> {
    Characteristic::ALL
        .iter()
        .map(|&ch| {
            let find = |tuned: bool| {
                summaries
                    .iter()
                    .find(|s| s.characteristic == ch && s.tuned == tuned)
                    .map(|s| s.mu)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "missing {} summary for {ch}",
                            if tuned { "tuned" } else { "untuned" }
                        ))
                    })
            };
            Ok((ch, find(false)?, find(true)?))
        })
        .collect()
}

/// Sorts an algorithm into the never / sometimes / always trichotomy.
pub fn classify_tuning_benefit(summaries: &[RobustnessSummary]) -> Result<TuningBenefit> {
    if let Some(s) = summaries.iter().find(|s| s.algorithm != summaries[0].algorithm) {
        return Err(Error::InvalidInput(format!("summaries mix {} and {}", summaries[0].algorithm, s.algorithm)));
    }
    let pairs = mu_pairs(summaries)?;
    if pairs.iter().all(|&(_, untuned, tuned)| tuned <= BENEFIT_RATIO * untuned) {
        Ok(TuningBenefit::Always)
    } else if pairs.iter().all(|&(_, untuned, tuned)| tuned >= BENEFIT_RATIO * untuned) {
        Ok(TuningBenefit::Never)
    } else {
        Ok(TuningBenefit::Sometimes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::default_configuration;
    use proptest::prelude::*;

    fn record(error: f64) -> RunRecord {
        RunRecord {
            algorithm: AlgorithmId::Shc,
            configuration: default_configuration(AlgorithmId::Shc),
            landscape_id: "L0".into(),
            seed: 0,
            best_x: vec![],
            best_fitness: 1.0 - error,
            error,
            evaluations_used: 1,
        }
    }

    pub(crate) fn summaries_from(alg: AlgorithmId, pairs: &[(f64, f64)]) -> Vec<RobustnessSummary> {
        Characteristic::ALL
            .iter()
            .zip(pairs)
            .flat_map(|(&ch, &(u, t))| {
                [(false, u), (true, t)].map(|(tuned, mu)| RobustnessSummary {
                    characteristic: ch,
                    algorithm: alg,
                    tuned,
                    mu,
                    sigma: 0.0,
                    per_value: vec![],
                })
            })
            .collect()
    }

    #[test]
    fn average_error_examples() {
        assert_eq!(average_error(&[record(0.0), record(0.0)]).unwrap(), 0.0);
        assert!((average_error(&[record(0.1), record(0.3)]).unwrap() - 0.2).abs() < 1e-15);
        let many: Vec<RunRecord> = (0..1000).map(|i| record(i as f64 / 1000.0)).collect();
        // closed form: (0 + 999) / 2 / 1000
        assert!((average_error(&many).unwrap() - 0.4995).abs() < 1e-12);
        assert!(average_error(&[]).is_err());
    }

    #[test]
    fn robustness_examples() {
        assert_eq!(robustness(&[0.3, 0.3, 0.3]).unwrap().1, 0.0);
        let (mu, sigma) = robustness(&[0.0, 0.2]).unwrap();
        assert!((mu - 0.1).abs() < 1e-15);
        assert!((sigma - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((sigma - 0.1414).abs() < 1e-4);
        let tenths: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        let (mu, sigma) = robustness(&tenths).unwrap();
        assert!((mu - 0.45).abs() < 1e-12);
        // sum of squared deviations = 0.825, / 9
        assert!((sigma - (0.825f64 / 9.0).sqrt()).abs() < 1e-12);
        assert!((sigma - 0.3028).abs() < 1e-4);
        assert!(robustness(&[0.1]).is_err());
    }

    #[test]
    fn trichotomy_on_reference_rows() {
        let es = summaries_from(
            AlgorithmId::Es,
            &[(0.085, 0.078), (0.084, 0.082), (0.542, 0.544), (0.097, 0.093), (0.110, 0.102)],
        );
        assert_eq!(classify_tuning_benefit(&es).unwrap(), TuningBenefit::Never);
        let bfoa = summaries_from(
            AlgorithmId::Bfoa,
            &[(0.118, 0.003), (0.120, 0.003), (0.754, 0.417), (0.317, 0.022), (0.260, 0.010)],
        );
        assert_eq!(classify_tuning_benefit(&bfoa).unwrap(), TuningBenefit::Always);
        let pso = summaries_from(
            AlgorithmId::Pso,
            &[(0.025, 0.014), (0.025, 0.016), (0.420, 0.157), (0.076, 0.022), (0.043, 0.014)],
        );
        // every PSO ratio clears 0.75, including 0.025 -> 0.016
        assert_eq!(classify_tuning_benefit(&pso).unwrap(), TuningBenefit::Always);
        let mixed = summaries_from(
            AlgorithmId::Pso,
            &[(0.025, 0.024), (0.025, 0.023), (0.420, 0.157), (0.076, 0.070), (0.043, 0.040)],
        );
        assert_eq!(classify_tuning_benefit(&mixed).unwrap(), TuningBenefit::Sometimes);
    }

    #[test]
    fn classify_needs_every_characteristic() {
        let mut s = summaries_from(AlgorithmId::Ga, &[(0.1, 0.1); 5]);
        s.retain(|x| x.characteristic != Characteristic::Boundary);
        assert!(classify_tuning_benefit(&s).is_err());
    }

    proptest! {
        #[test]
        fn robustness_is_permutation_invariant(mut v in prop::collection::vec(0.0f64..1.0, 2..20), k in 0.0f64..10.0) {
            let (mu, sigma) = robustness(&v).unwrap();
            v.reverse();
            v.rotate_left(1);
            let (mu2, sigma2) = robustness(&v).unwrap();
            prop_assert!((mu - mu2).abs() < 1e-12);
            prop_assert!((sigma - sigma2).abs() < 1e-12);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let (_, sigma3) = robustness(&scaled).unwrap();
            prop_assert!((sigma3 - k * sigma).abs() < 1e-9);
        }

        #[test]
        fn concatenation_is_weighted_mean(a in prop::collection::vec(0.0f64..1.0, 1..30), b in prop::collection::vec(0.0f64..1.0, 1..30)) {
            let ra: Vec<RunRecord> = a.iter().map(|&e| record(e)).collect();
            let rb: Vec<RunRecord> = b.iter().map(|&e| record(e)).collect();
            let all: Vec<RunRecord> = ra.iter().chain(&rb).cloned().collect();
            let weighted = (average_error(&ra).unwrap() * a.len() as f64 + average_error(&rb).unwrap() * b.len() as f64)
                / (a.len() + b.len()) as f64;
            prop_assert!((average_error(&all).unwrap() - weighted).abs() < 1e-12);
        }

        #[test]
        fn uniform_improvement_keeps_always(pairs in prop::collection::vec((0.01f64..1.0, 0.0f64..0.75), 5), shrink in 0.0f64..1.0) {
            let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(u, r)| (u, u * r)).collect();
            let s = summaries_from(AlgorithmId::Hs, &pairs);
            prop_assert_eq!(classify_tuning_benefit(&s).unwrap(), TuningBenefit::Always);
            let better: Vec<(f64, f64)> = pairs.iter().map(|&(u, t)| (u, t * shrink)).collect();
            let s = summaries_from(AlgorithmId::Hs, &better);
            prop_assert_eq!(classify_tuning_benefit(&s).unwrap(), TuningBenefit::Always);
        }
    }
}
