//! The Bees Algorithm.
//!
//! Each generation the best `sites` points found by the scouts are searched
//! locally: the `elite_sites` best recruit `bees_per_elite` foragers, the
//! others `bees_per_site`, all within a patch around the site. A site keeps
//! the best of itself and its foragers. The remaining scouts are re-sent to
//! uniformly random locations, and the patch shrinks by 5% per generation.

use rand::Rng as _;

use super::{Configuration, Evaluator};
use crate::seed::Rng;

const PATCH_SHRINK: f64 = 0.95;

pub(super) struct Params {
    pub scouts: usize,
    pub sites: usize,
    pub elite_sites: usize,
    pub bees_per_site: usize,
    pub bees_per_elite: usize,
    pub patch_fraction: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            scouts: c.count("scouts"),
            sites: c.count("sites"),
            elite_sites: c.count("elite_sites"),
            bees_per_site: c.count("bees_per_site"),
            bees_per_elite: c.count("bees_per_elite"),
            patch_fraction: c.get("patch_fraction"),
        }
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let mut patch = p.patch_fraction * ev.boundary();

    let mut colony: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.scouts);
    for _ in 0..p.scouts {
        let mut x = ev.random_point(rng);
        let f = ev.eval(&mut x)?;
        colony.push((x, f));
    }

    let mut forager = vec![0.0; ev.dims()];
    loop {
        colony.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (rank, site) in colony.iter_mut().take(p.sites).enumerate() {
            let recruits = if rank < p.elite_sites {
                p.bees_per_elite
            } else {
                p.bees_per_site
            };
            let mut best: Option<(Vec<f64>, f64)> = None;
            for _ in 0..recruits {
                for (f, &x) in forager.iter_mut().zip(&site.0) {
                    *f = if rng.random::<bool>() {
                        x + rng.random::<f64>() * patch
                    } else {
                        x - rng.random::<f64>() * patch
                    };
                }
                let fit = ev.eval(&mut forager)?;
                if best.as_ref().is_none_or(|(_, bf)| fit > *bf) {
                    best = Some((forager.clone(), fit));
                }
            }
            if let Some((x, f)) = best {
                if f > site.1 {
                    *site = (x, f);
                }
            }
        }
        for scout in colony.iter_mut().skip(p.sites) {
            let mut x = ev.random_point(rng);
            let f = ev.eval(&mut x)?;
            *scout = (x, f);
        }
        patch *= PATCH_SHRINK;
    }
}
