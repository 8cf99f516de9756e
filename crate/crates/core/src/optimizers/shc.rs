//! Stochastic hill climbing: uniform perturbation inside a box neighbourhood,
//! accepting candidates that are no worse than the current point.

use rand::Rng as _;

use super::{Configuration, Evaluator};
use crate::seed::Rng;

pub(super) struct Params {
    pub neighborhood_fraction: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            neighborhood_fraction: c.get("neighborhood_fraction"),
        }
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let radius = p.neighborhood_fraction * ev.boundary();
    let mut current = ev.random_point(rng);
    let mut current_f = ev.eval(&mut current)?;
    let mut candidate = current.clone();
    loop {
        for (c, &x) in candidate.iter_mut().zip(&current) {
            *c = x + rng.random_range(-radius..=radius);
        }
        let f = ev.eval(&mut candidate)?;
        if f >= current_f {
            current_f = f;
            current.copy_from_slice(&candidate);
        }
    }
}
