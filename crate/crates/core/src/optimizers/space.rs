//! Parameter spaces and default configurations of the seven optimizers.

use super::{AlgorithmId, ParameterDescriptor, ParameterKind};

const fn int(
    name: &'static str,
    lower: f64,
    upper: f64,
    default: f64,
    grid: &'static [f64],
) -> ParameterDescriptor {
    ParameterDescriptor {
        name,
        kind: ParameterKind::Integer,
        lower,
        upper,
        default,
        grid,
    }
}

const fn real(
    name: &'static str,
    lower: f64,
    upper: f64,
    default: f64,
    grid: &'static [f64],
) -> ParameterDescriptor {
    ParameterDescriptor {
        name,
        kind: ParameterKind::Real,
        lower,
        upper,
        default,
        grid,
    }
}

// Lengths (steps, patches, ranges, velocities, neighbourhoods) are fractions
// of the landscape boundary.

const BFOA: [ParameterDescriptor; 10] = [
    int("population", 4.0, 200.0, 50.0, &[10.0, 20.0, 50.0, 100.0]),
    real("step_fraction", 1e-4, 0.5, 0.1, &[0.001, 0.005, 0.01, 0.05, 0.1]),
    int("chemotactic_steps", 1.0, 1000.0, 100.0, &[10.0, 50.0, 100.0, 200.0]),
    int("swim_length", 1.0, 20.0, 4.0, &[1.0, 4.0, 8.0]),
    int("reproduction_steps", 1.0, 20.0, 4.0, &[2.0, 4.0, 8.0]),
    int("elimination_events", 1.0, 20.0, 2.0, &[1.0, 2.0, 4.0]),
    real("elimination_prob", 0.0, 1.0, 0.25, &[0.1, 0.25, 0.5]),
    real("attract_weight", 0.0, 1.0, 0.1, &[0.0, 0.1, 0.2]),
    real("attract_width", 1e-3, 10.0, 0.2, &[0.05, 0.2, 1.0]),
    real("repel_weight", 0.0, 1.0, 0.1, &[0.0, 0.1, 0.2]),
];

const BEES: [ParameterDescriptor; 6] = [
    int("scouts", 4.0, 200.0, 45.0, &[20.0, 45.0, 80.0]),
    int("sites", 1.0, 50.0, 3.0, &[3.0, 5.0, 8.0]),
    int("elite_sites", 1.0, 50.0, 1.0, &[1.0, 2.0, 3.0]),
    int("bees_per_site", 1.0, 50.0, 2.0, &[2.0, 4.0]),
    int("bees_per_elite", 1.0, 50.0, 7.0, &[5.0, 7.0, 10.0]),
    real("patch_fraction", 1e-4, 1.0, 0.1, &[0.01, 0.05, 0.1, 0.2, 0.3]),
];

const ES: [ParameterDescriptor; 2] = [
    int("population", 1.0, 500.0, 30.0, &[10.0, 30.0, 50.0, 100.0]),
    int("children", 1.0, 500.0, 20.0, &[10.0, 20.0, 50.0, 100.0]),
];

// mutation default is 1 / (bits * D); the value here is for D = 2.
const GA: [ParameterDescriptor; 4] = [
    int("population", 2.0, 1000.0, 100.0, &[20.0, 50.0, 100.0, 200.0]),
    int("bits", 2.0, 32.0, 16.0, &[8.0, 16.0, 32.0]),
    real("crossover", 0.0, 1.0, 0.98, &[0.6, 0.7, 0.8, 0.9, 0.98]),
    real("mutation", 0.0, 1.0, 1.0 / 32.0, &[0.001, 0.005, 0.01, 0.05, 0.1]),
];

const HS: [ParameterDescriptor; 4] = [
    int("memory", 1.0, 200.0, 20.0, &[5.0, 10.0, 20.0, 50.0]),
    real("consideration", 0.0, 1.0, 0.95, &[0.7, 0.8, 0.9, 0.95, 0.99]),
    real("adjustment", 0.0, 1.0, 0.7, &[0.1, 0.3, 0.5, 0.7, 0.9]),
    real("range_fraction", 0.0, 1.0, 0.05, &[0.001, 0.005, 0.01, 0.05, 0.1]),
];

const PSO: [ParameterDescriptor; 4] = [
    int("population", 1.0, 500.0, 30.0, &[10.0, 20.0, 30.0, 50.0, 100.0]),
    real("max_velocity_fraction", 1e-4, 1.0, 0.1, &[0.01, 0.05, 0.1, 0.2, 0.5]),
    real("personal_bias", 0.0, 4.0, 2.0, &[0.5, 1.0, 1.5, 2.0, 2.5]),
    real("global_bias", 0.0, 4.0, 2.0, &[0.5, 1.0, 1.5, 2.0, 2.5]),
];

const SHC: [ParameterDescriptor; 1] = [real(
    "neighborhood_fraction",
    1e-4,
    1.0,
    0.05,
    &[0.01, 0.05, 0.1, 0.25, 0.5],
)];

pub(super) fn descriptors(algorithm: AlgorithmId) -> &'static [ParameterDescriptor] {
    match algorithm {
        AlgorithmId::Bfoa => &BFOA,
        AlgorithmId::Bees => &BEES,
        AlgorithmId::Es => &ES,
        AlgorithmId::Ga => &GA,
        AlgorithmId::Hs => &HS,
        AlgorithmId::Pso => &PSO,
        AlgorithmId::Shc => &SHC,
    }
}
