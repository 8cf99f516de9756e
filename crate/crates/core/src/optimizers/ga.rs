//! Binary-coded genetic algorithm.
//!
//! Each coordinate is a `bits`-long unsigned integer mapped linearly onto
//! `[0, boundary]`. Binary tournaments pick parents, one-point crossover and
//! per-bit mutation build the offspring, and the best individual survives
//! each generational replacement unchanged.

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};

use super::{Configuration, Evaluator};
use crate::seed::Rng;

pub(super) struct Params {
    pub population: usize,
    pub bits: usize,
    pub crossover: f64,
    pub mutation: f64,
}

impl From<&Configuration> for Params {
    fn from(c: &Configuration) -> Self {
        Params {
            population: c.count("population"),
            bits: c.count("bits"),
            crossover: c.get("crossover"),
            mutation: c.get("mutation"),
        }
    }
}

/// Maps a bit string (most significant bit first per coordinate) to a point.
pub(super) fn decode(chromosome: &[u8], bits: usize, boundary: f64, out: &mut [f64]) {
    let max = ((1u64 << bits) - 1) as f64;
    for (x, gene) in out.iter_mut().zip(chromosome.chunks_exact(bits)) {
        let int = gene.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        *x = int as f64 / max * boundary;
    }
}

struct Mutator {
    rate: f64,
    skip: Option<Geometric>,
}

impl Mutator {
    fn new(rate: f64) -> Self {
        let skip = (rate > 0.0 && rate < 1.0).then(|| Geometric::new(rate).expect("rate in (0, 1)"));
        Mutator { rate, skip }
    }

    fn apply(&self, chromosome: &mut [u8], rng: &mut Rng) {
        if self.rate >= 1.0 {
            chromosome.iter_mut().for_each(|b| *b ^= 1);
            return;
        }
        let Some(skip) = &self.skip else { return };
        // jump straight to the next flipped bit
        let mut i = skip.sample(rng);
        while (i as usize) < chromosome.len() {
            chromosome[i as usize] ^= 1;
            i = i.saturating_add(1).saturating_add(skip.sample(rng));
        }
    }
}

fn tournament(fitness: &[f64], rng: &mut Rng) -> usize {
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    if fitness[b] > fitness[a] {
        b
    } else {
        a
    }
}

pub(super) fn run(p: &Params, ev: &mut Evaluator, rng: &mut Rng) -> Option<()> {
    let dims = ev.dims();
    let boundary = ev.boundary();
    let len = p.bits * dims;
    let n = p.population;
    let mutator = Mutator::new(p.mutation);
    let mut point = vec![0.0; dims];

    let mut evaluate = |chromosome: &[u8], ev: &mut Evaluator| {
        decode(chromosome, p.bits, boundary, &mut point);
        ev.eval(&mut point)
    };

    // chromosomes are stored back to back; `next` is rebuilt in place each
    // generation and then swapped with `pop`
    let mut pop = vec![0u8; n * len];
    let mut fitness = Vec::with_capacity(n);
    for chromosome in pop.chunks_exact_mut(len) {
        chromosome.iter_mut().for_each(|b| *b = rng.random_range(0..=1u8));
        fitness.push(evaluate(chromosome, ev)?);
    }
    let mut next = vec![0u8; n * len];
    let mut next_fitness = Vec::with_capacity(n);

    loop {
        let elite = (0..n).fold(0, |best, i| if fitness[i] > fitness[best] { i } else { best });
        next[..len].copy_from_slice(&pop[elite * len..(elite + 1) * len]);
        next_fitness.clear();
        next_fitness.push(fitness[elite]);
        while next_fitness.len() < n {
            let a = tournament(&fitness, rng);
            let b = tournament(&fitness, rng);
            let at = next_fitness.len();
            let pair = if at + 1 < n { 2 } else { 1 };
            let (pa, pb) = (&pop[a * len..(a + 1) * len], &pop[b * len..(b + 1) * len]);
            let children = &mut next[at * len..(at + pair) * len];
            children[..len].copy_from_slice(pa);
            if pair == 2 {
                children[len..].copy_from_slice(pb);
            }
            if len > 1 && rng.random::<f64>() < p.crossover {
                let cut = rng.random_range(1..len);
                children[cut..len].copy_from_slice(&pb[cut..]);
                if pair == 2 {
                    children[len + cut..].copy_from_slice(&pa[cut..]);
                }
            }
            for child in children.chunks_exact_mut(len) {
                mutator.apply(child, rng);
                next_fitness.push(evaluate(child, ev)?);
            }
        }
        std::mem::swap(&mut pop, &mut next);
        std::mem::swap(&mut fitness, &mut next_fitness);
    }
}
