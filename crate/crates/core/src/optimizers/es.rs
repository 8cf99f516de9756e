//! (mu, lambda) / (mu + lambda) evolution strategy.
//!
//! Children are isotropic Gaussian mutations of the parents, taken best first
//! and cycling when there are more children than parents. A
//! single step size is adapted once per generation by the 1/5 success rule.
//! Comma selection is used when `children >= population`, plus selection
//! otherwise.

use rand_distr::{Distribution, StandardNormal};

use super::{Configuration, Evaluator};
use crate::seed::Rng;

/// Initial step size as a fraction of the boundary.
const INITIAL_SIGMA_FRACTION: f64 = 0.05;
/// Step-size contraction factor of the 1/5 rule.
const ADAPT: f64 = 0.817;
const TARGET_SUCCESS: f64 = 0.2;

pub(super) struct Params {
    pub population: usize,
    pub children: usize,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            population: c.count("population"),
            children: c.count("children"),
        }
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let boundary = ev.boundary();
    let comma = p.children >= p.population;
    let mut sigma = INITIAL_SIGMA_FRACTION * boundary;
    let (sigma_min, sigma_max) = (1e-12 * boundary, boundary);

    let mut parents: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.population);
    for _ in 0..p.population {
        let mut x = ev.random_point(rng);
        let f = ev.eval(&mut x)?;
        parents.push((x, f));
    }
    parents.sort_by(|a, b| b.1.total_cmp(&a.1));

    loop {
        let mut offspring: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.children);
        let mut successes = 0usize;
        for i in 0..p.children {
            let (parent, parent_f) = &parents[i % parents.len()];
            let mut child: Vec<f64> = parent
                .iter()
                .map(|&x| {
                    let z: f64 = StandardNormal.sample(rng);
                    x + sigma * z
                })
                .collect();
            let f = ev.eval(&mut child)?;
            if f > *parent_f {
                successes += 1;
            }
            offspring.push((child, f));
        }

        let mut pool = if comma {
            offspring
        } else {
            let mut pool = std::mem::take(&mut parents);
            pool.extend(offspring);
            pool
        };
        // stable: earlier (older) individuals win ties
        pool.sort_by(|a, b| b.1.total_cmp(&a.1));
        pool.truncate(p.population);
        parents = pool;

        let rate = successes as f64 / p.children as f64;
        if rate > TARGET_SUCCESS {
            sigma /= ADAPT;
        } else if rate < TARGET_SUCCESS {
            sigma *= ADAPT;
        }
        sigma = sigma.clamp(sigma_min, sigma_max);
    }
}
