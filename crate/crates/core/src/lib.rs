//! Benchmark framework measuring how much racing-based parameter tuning helps
//! seven nature-inspired optimizers on randomly generated Gaussian landscapes.
//!
//! The pipeline is: [`landscape`] generates test problems, [`optimizers`]
//! runs the algorithms under a fixed evaluation budget, [`tuner`] races
//! candidate configurations with the Friedman test, [`harness`] sweeps the five
//! landscape characteristics, [`stats`] reduces runs to robustness figures and
//! [`report`] writes CSV summaries and spider plots.

pub mod error;
pub mod harness;
pub mod landscape;
pub mod optimizers;
pub mod report;
pub mod seed;
pub mod stats;
pub mod tuner;

pub use error::{Error, Result};
pub use landscape::{error_of, GaussianComponent, Landscape, LandscapeSpec};
pub use optimizers::{
    default_configuration, default_configuration_for, optimize, optimize_observed, parameter_space,
    AlgorithmId, Budget, Configuration, ParameterDescriptor, ParameterKind, RunRecord,
};
pub use harness::{Characteristic, CharacteristicSpec, Experiment, ExperimentPlan};
pub use stats::{RobustnessSummary, TuningBenefit};
pub use tuner::{OptimizerRunner, Runner};
