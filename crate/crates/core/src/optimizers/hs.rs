//! Harmony search.
//!
//! Each new harmony takes every coordinate either from a random memory member
//! (probability `consideration`), optionally pitch-adjusted by up to
//! `range_fraction * boundary` (probability `adjustment`), or uniformly at
//! random. It replaces the worst harmony in memory when strictly better.

use rand::Rng as _;

use super::{Configuration, Evaluator};
use crate::seed::Rng;

pub(super) struct Params {
    pub memory: usize,
    pub consideration: f64,
    pub adjustment: f64,
    pub range_fraction: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            memory: c.count("memory"),
            consideration: c.get("consideration"),
            adjustment: c.get("adjustment"),
            range_fraction: c.get("range_fraction"),
        }
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let dims = ev.dims();
    let boundary = ev.boundary();
    let range = p.range_fraction * boundary;

    let mut memory: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.memory);
    for _ in 0..p.memory {
        let mut x = ev.random_point(rng);
        let f = ev.eval(&mut x)?;
        memory.push((x, f));
    }

    let mut harmony = vec![0.0; dims];
    loop {
        for (d, h) in harmony.iter_mut().enumerate() {
            if rng.random::<f64>() < p.consideration {
                let pick = rng.random_range(0..memory.len());
                *h = memory[pick].0[d];
                if rng.random::<f64>() < p.adjustment {
                    *h += range * rng.random_range(-1.0..=1.0);
                }
            } else {
                *h = rng.random::<f64>() * boundary;
            }
        }
        let f = ev.eval(&mut harmony)?;
        let worst = worst_index(&memory);
        if f > memory[worst].1 {
            memory[worst].0.copy_from_slice(&harmony);
            memory[worst].1 = f;
        }
    }
}

fn worst_index(memory: &[(Vec<f64>, f64)]) -> usize {
    let mut worst = 0;
    for (i, (_, f)) in memory.iter().enumerate() {
        if *f < memory[worst].1 {
            worst = i;
        }
    }
    worst
}
