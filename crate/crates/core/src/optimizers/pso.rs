//! Particle swarm optimisation without inertia weight.
//!
//! Velocities are pulled towards the personal and global bests with
//! independent uniform coefficients per coordinate and clamped to
//! `max_velocity_fraction * boundary`. A particle that leaves the box is
//! reflected and its velocity reversed in that coordinate.

use rand::Rng as _;

use super::{Configuration, Evaluator};
use crate::seed::Rng;

pub(super) struct Params {
    pub population: usize,
    pub max_velocity_fraction: f64,
    pub personal_bias: f64,
    pub global_bias: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            population: c.count("population"),
            max_velocity_fraction: c.get("max_velocity_fraction"),
            personal_bias: c.get("personal_bias"),
            global_bias: c.get("global_bias"),
        }
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best: Vec<f64>,
    best_f: f64,
}

pub(super) fn clamp_velocity(velocity: &mut [f64], max: f64) {
    for v in velocity {
        *v = v.clamp(-max, max);
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let boundary = ev.boundary();
    let vmax = p.max_velocity_fraction * boundary;

    let mut swarm = Vec::with_capacity(p.population);
    let mut global = (Vec::new(), f64::NEG_INFINITY);
    for _ in 0..p.population {
        let mut position = ev.random_point(rng);
        let f = ev.eval(&mut position)?;
        let velocity = (0..position.len()).map(|_| rng.random_range(-vmax..=vmax)).collect();
        if f > global.1 {
            global = (position.clone(), f);
        }
        swarm.push(Particle {
            best: position.clone(),
            position,
            velocity,
            best_f: f,
        });
    }

    loop {
        for particle in swarm.iter_mut() {
            for d in 0..particle.position.len() {
                let x = particle.position[d];
                particle.velocity[d] += p.personal_bias * rng.random::<f64>() * (particle.best[d] - x)
                    + p.global_bias * rng.random::<f64>() * (global.0[d] - x);
            }
            clamp_velocity(&mut particle.velocity, vmax);
            for (x, v) in particle.position.iter_mut().zip(particle.velocity.iter_mut()) {
                *x += *v;
                if *x > boundary {
                    *x = boundary - (*x - boundary);
                    *v = -*v;
                } else if *x < 0.0 {
                    *x = -*x;
                    *v = -*v;
                }
            }
            let f = ev.eval(&mut particle.position)?;
            if f > particle.best_f {
                particle.best_f = f;
                particle.best.copy_from_slice(&particle.position);
            }
        }
        for particle in &swarm {
            if particle.best_f > global.1 {
                global.1 = particle.best_f;
                global.0.copy_from_slice(&particle.best);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_clamp_bounds_every_component() {
        let mut v = vec![-10.0, 0.5, 3.0, -0.2, 100.0];
        clamp_velocity(&mut v, 0.1 * 30.0);
        assert!(v.iter().all(|c| c.abs() <= 3.0));
        assert_eq!(v, vec![-3.0, 0.5, 3.0, -0.2, 3.0]);
    }
}
