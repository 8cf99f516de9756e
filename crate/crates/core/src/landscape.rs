//! Max-set-of-Gaussians landscapes.
//!
//! A landscape is the pointwise maximum of isotropic Gaussian bumps over the
//! box `[0, boundary]^D`. One bump has peak height 1 (the global optimum), the
//! rest share the peak height `ratio`. Because the aggregation is a maximum,
//! the global optimum and its value are known exactly.

use std::fmt::Write as _;

use rand::Rng as _;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::seed::{self, SeedPath};

/// Number of mean placements tried before settling for the best-separated one.
pub const PLACEMENT_ATTEMPTS: usize = 1_000;

/// Tolerance above 1.0 accepted by [`error_of`] before a fitness is rejected.
pub const FITNESS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSpec {
    pub num_local_optima: usize,
    /// Peak height of each local optimum relative to the global one.
    pub ratio: f64,
    pub dimensions: usize,
    /// Upper bound of every coordinate.
    pub boundary: f64,
    /// Curvature coefficient; larger values give steeper, narrower peaks.
    pub smoothness: f64,
    pub seed: u64,
}

impl LandscapeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions < 1 {
            return Err(Error::InvalidSpec("dimensions must be at least 1".into()));
        }
        if !(self.boundary > 0.0 && self.boundary.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "boundary must be positive, got {}",
                self.boundary
            )));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if !(self.smoothness > 0.0 && self.smoothness.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "smoothness must be positive, got {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    /// Inverse width shared by every component.
    pub fn curvature(&self) -> f64 {
        self.smoothness / self.boundary
    }

    /// Minimum pairwise distance requested between component means.
    pub fn min_separation(&self) -> f64 {
        2.0 / self.curvature()
    }

    /// Stable identifier of the landscape this spec generates.
    pub fn landscape_id(&self) -> String {
        let path = SeedPath::root(self.seed)
            .child(self.num_local_optima as u64)
            .child_f64(self.ratio)
            .child(self.dimensions as u64)
            .child_f64(self.boundary)
            .child_f64(self.smoothness);
        format!("L{:016x}", path.seed())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub curvature: f64,
    pub weight: f64,
}

impl GaussianComponent {
    /// `weight * exp(-0.5 * curvature^2 * |x - mean|^2)`, without flooring.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.weight * (-0.5 * self.curvature * self.curvature * sq_dist(x, &self.mean)).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    spec: LandscapeSpec,
    components: Vec<GaussianComponent>,
    global_index: usize,
    id: String,
    // per component: (ln weight, 0.5 * curvature^2)
    log_terms: Vec<(f64, f64)>,
}

impl Landscape {
    /// Samples a landscape from `spec`. Pure function of the spec.
    pub fn generate(spec: &LandscapeSpec) -> Result<Landscape> {
        spec.validate()?;
        let mut rng = seed::rng(spec.seed);
        let n = spec.num_local_optima + 1;
        let dims = spec.dimensions;
        let target = spec.min_separation();

        let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let means: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..dims)
                        .map(|_| rng.random::<f64>() * spec.boundary)
                        .collect()
                })
                .collect();
            let sep = min_pairwise_distance(&means);
            if sep >= target {
                best = Some((sep, means));
                break;
            }
            if best.as_ref().is_none_or(|(s, _)| sep > *s) {
                best = Some((sep, means));
            }
        }
        let (sep, means) = best.expect("at least one placement attempt");
        if sep < 0.5 * target {
            return Err(Error::Overconstrained(format!(
                "{n} optima in [0, {}]^{dims} cannot be kept {target:.3} apart (best draw {sep:.3})",
                spec.boundary
            )));
        }

        let global_index = rng.random_range(0..n);
        let curvature = spec.curvature();
        let components = means
            .into_iter()
            .enumerate()
            .map(|(i, mean)| GaussianComponent {
                mean,
                curvature,
                weight: if i == global_index { 1.0 } else { spec.ratio },
            })
            .collect();
        Landscape::from_parts(spec.clone(), components, global_index)
    }

    /// Assembles a landscape from explicit components, checking invariants.
    pub fn from_parts(
        spec: LandscapeSpec,
        components: Vec<GaussianComponent>,
        global_index: usize,
    ) -> Result<Landscape> {
        spec.validate()?;
        if components.is_empty() || global_index >= components.len() {
            return Err(Error::InvalidSpec(format!(
                "global index {global_index} out of {} components",
                components.len()
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != spec.dimensions {
                return Err(Error::DimensionMismatch {
                    expected: spec.dimensions,
                    got: c.mean.len(),
                });
            }
            if c.mean.iter().any(|&m| !(0.0..=spec.boundary).contains(&m)) {
                return Err(Error::InvalidSpec(format!("component {i} mean outside the domain")));
            }
            if !(c.curvature > 0.0 && c.curvature.is_finite()) {
                return Err(Error::InvalidSpec(format!("component {i} curvature must be positive")));
            }
            let expected = if i == global_index { 1.0 } else { spec.ratio };
            if c.weight != expected {
                return Err(Error::InvalidSpec(format!(
                    "component {i} weight {} (expected {expected})",
                    c.weight
                )));
            }
        }
        let log_terms = components
            .iter()
            .map(|c| (c.weight.ln(), 0.5 * c.curvature * c.curvature))
            .collect();
        Ok(Landscape {
            id: spec.landscape_id(),
            spec,
            components,
            global_index,
            log_terms,
        })
    }

    pub fn spec(&self) -> &LandscapeSpec {
        &self.spec
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn global_index(&self) -> usize {
        self.global_index
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimensions(&self) -> usize {
        self.spec.dimensions
    }

    pub fn boundary(&self) -> f64 {
        self.spec.boundary
    }

    /// Fitness at `x`, checked against the domain.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.dimensions {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dimensions,
                got: x.len(),
            });
        }
        if let Some((index, &value)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=self.spec.boundary).contains(*v))
        {
            return Err(Error::OutOfDomain {
                index,
                value,
                boundary: self.spec.boundary,
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Fitness at `x` without domain checks. `x` must have the right length.
    ///
    /// The winning component is picked on the log scale, so underflow far from
    /// every peak never hides which component dominates. Values that
    /// underflow are floored at the smallest positive normal `f64`.
    #[inline]
    pub fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0;
        let mut best_q = 0.0;
        for (i, (c, &(ln_w, half_k2))) in self.components.iter().zip(&self.log_terms).enumerate() {
            let q = half_k2 * sq_dist(x, &c.mean);
            let expo = ln_w - q;
            if expo > best {
                best = expo;
                best_i = i;
                best_q = q;
            }
        }
        let value = self.components[best_i].weight * (-best_q).exp();
        value.max(f64::MIN_POSITIVE)
    }

    /// Location and value of the global optimum.
    pub fn global_optimum(&self) -> (Vec<f64>, f64) {
        (self.components[self.global_index].mean.clone(), 1.0)
    }

    /// Plain-text document; every real is written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "# tunebench landscape");
        let _ = writeln!(out, "id = \"{}\"", self.id);
        let _ = writeln!(out, "global_index = {}", self.global_index);
        let _ = writeln!(out);
        let _ = writeln!(out, "[spec]");
        let _ = writeln!(out, "num_local_optima = {}", s.num_local_optima);
        let _ = writeln!(out, "ratio = {}", fmt17(s.ratio));
        let _ = writeln!(out, "dimensions = {}", s.dimensions);
        let _ = writeln!(out, "boundary = {}", fmt17(s.boundary));
        let _ = writeln!(out, "smoothness = {}", fmt17(s.smoothness));
        let _ = writeln!(out, "seed = \"{}\"", s.seed);
        for c in &self.components {
            let _ = writeln!(out);
            let _ = writeln!(out, "[[components]]");
            let _ = writeln!(out, "weight = {}", fmt17(c.weight));
            let _ = writeln!(out, "curvature = {}", fmt17(c.curvature));
            let mean: Vec<String> = c.mean.iter().map(|&m| fmt17(m)).collect();
            let _ = writeln!(out, "mean = [{}]", mean.join(", "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Landscape> {
        let doc: LandscapeDoc = toml::from_str(text).map_err(|e| Error::parse("landscape", e))?;
        let seed = doc
            .spec
            .seed
            .parse::<u64>()
            .map_err(|e| Error::parse("landscape seed", e))?;
        let spec = LandscapeSpec {
            num_local_optima: doc.spec.num_local_optima,
            ratio: doc.spec.ratio,
            dimensions: doc.spec.dimensions,
            boundary: doc.spec.boundary,
            smoothness: doc.spec.smoothness,
            seed,
        };
        let components = doc
            .components
            .into_iter()
            .map(|c| GaussianComponent {
                mean: c.mean,
                curvature: c.curvature,
                weight: c.weight,
            })
            .collect::<Vec<_>>();
        if components.len() != spec.num_local_optima + 1 {
            return Err(Error::parse(
                "landscape",
                format!("{} components for {} local optima", components.len(), spec.num_local_optima),
            ));
        }
        let landscape = Landscape::from_parts(spec, components, doc.global_index)?;
        if landscape.id != doc.id {
            return Err(Error::parse("landscape", format!("id {} does not match spec", doc.id)));
        }
        Ok(landscape)
    }
}

/// `1 - best_fitness`, rejecting fitness values no landscape can produce.
pub fn error_of(best_fitness: f64) -> Result<f64> {
    if !(0.0..=1.0 + FITNESS_SLACK).contains(&best_fitness) {
        return Err(Error::FitnessOutOfRange(best_fitness));
    }
    Ok((1.0 - best_fitness).max(0.0))
}

#[derive(Deserialize)]
struct LandscapeDoc {
    id: String,
    global_index: usize,
    spec: SpecDoc,
    components: Vec<ComponentDoc>,
}

#[derive(Deserialize)]
struct SpecDoc {
    num_local_optima: usize,
    ratio: f64,
    dimensions: usize,
    boundary: f64,
    smoothness: f64,
    seed: String,
}

#[derive(Deserialize)]
struct ComponentDoc {
    weight: f64,
    curvature: f64,
    mean: Vec<f64>,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            min = min.min(sq_dist(&points[i], &points[j]));
        }
    }
    min.sqrt()
}
