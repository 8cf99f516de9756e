//! Bacterial foraging optimisation.
//!
//! Nested loops of elimination-dispersal events, reproduction steps and
//! chemotactic steps. In a chemotactic step every cell tumbles one step in a
//! random direction and keeps swimming along it while its health term
//! improves, for at most `swim_length` extra steps. The health term is the
//! landscape fitness plus the cell-to-cell swarming signal
//! `(attract_weight - repel_weight) * sum_j exp(-attract_width * |x - x_j|^2)`,
//! with repulsion sharing the attraction width.

use rand::Rng as _;

use super::{Configuration, Evaluator};
use crate::landscape::sq_dist;
use crate::seed::Rng;

pub(super) struct Params {
    pub population: usize,
    pub step_fraction: f64,
    pub chemotactic_steps: usize,
    pub swim_length: usize,
    pub reproduction_steps: usize,
    pub elimination_events: usize,
    pub elimination_prob: f64,
    pub attract_weight: f64,
    pub attract_width: f64,
    pub repel_weight: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            population: c.count("population"),
            step_fraction: c.get("step_fraction"),
            chemotactic_steps: c.count("chemotactic_steps"),
            swim_length: c.count("swim_length"),
            reproduction_steps: c.count("reproduction_steps"),
            elimination_events: c.count("elimination_events"),
            elimination_prob: c.get("elimination_prob"),
            attract_weight: c.get("attract_weight"),
            attract_width: c.get("attract_width"),
            repel_weight: c.get("repel_weight"),
        }
    }
}

#[derive(Clone)]
struct Cell {
    x: Vec<f64>,
    fitness: f64,
    health: f64,
}

struct Swarming {
    coefficient: f64,
    width: f64,
}

impl Swarming {
    fn signal(&self, x: &[f64], cells: &[Cell]) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        let sum: f64 = cells.iter().map(|c| (-self.width * sq_dist(x, &c.x)).exp()).sum();
        self.coefficient * sum
    }
}

fn random_direction(dims: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return d.into_iter().map(|v| v / norm).collect();
        }
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let dims = ev.dims();
    let step = p.step_fraction * ev.boundary();
    let swarming = Swarming {
        coefficient: p.attract_weight - p.repel_weight,
        width: p.attract_width,
    };

    let mut cells: Vec<Cell> = Vec::with_capacity(p.population);
    for _ in 0..p.population {
        let mut x = ev.random_point(rng);
        let fitness = ev.eval(&mut x)?;
        cells.push(Cell { x, fitness, health: 0.0 });
    }

    let mut trial = vec![0.0; dims];
    for _ in 0..p.elimination_events {
        for _ in 0..p.reproduction_steps {
            cells.iter_mut().for_each(|c| c.health = 0.0);
            for _ in 0..p.chemotactic_steps {
                for i in 0..cells.len() {
                    let mut last = cells[i].fitness + swarming.signal(&cells[i].x, &cells);
                    cells[i].health += last;
                    let dir = random_direction(dims, rng);
                    let mut swims = 0;
                    loop {
                        for ((t, &x), &d) in trial.iter_mut().zip(&cells[i].x).zip(&dir) {
                            *t = x + step * d;
                        }
                        let fitness = ev.eval(&mut trial)?;
                        cells[i].x.copy_from_slice(&trial);
                        cells[i].fitness = fitness;
                        let j = fitness + swarming.signal(&cells[i].x, &cells);
                        if swims == p.swim_length || j <= last {
                            break;
                        }
                        last = j;
                        swims += 1;
                    }
                }
            }
            // healthiest half splits, the other half dies
            cells.sort_by(|a, b| b.health.total_cmp(&a.health));
            let half = cells.len() / 2;
            for i in 0..half {
                let clone = cells[i].clone();
                let n = cells.len();
                cells[n - 1 - i] = clone;
            }
        }
        for cell in cells.iter_mut() {
            if rng.random::<f64>() < p.elimination_prob {
                cell.x = ev.random_point(rng);
                cell.fitness = ev.eval(&mut cell.x)?;
            }
        }
    }
    Some(())
}
