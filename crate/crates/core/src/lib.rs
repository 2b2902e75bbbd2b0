//! Sampling policies for finite-horizon estimation of Brownian motion and
//! Ornstein-Uhlenbeck signals under a hard sample budget, with a Monte Carlo
//! simulator to check every analytic number.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bm;
pub mod error;
pub mod models;
mod numerics;
pub mod ou;
pub mod series;
pub mod sim;

pub use bm::{BmPolicyResult, DeltaConvention, OptimizerConfig};
pub use error::{Result, SamplingError};
pub use models::{
    mmse_reconstruct, normalize_ou, GridTrigger, GriddedThresholds, PolicyArtifact, PolicyVariant,
    ProcessKind, ProcessModel, SeriesConfig, SimulationReport,
};
pub use ou::{GridSpec, ValueGrid};
pub use series::LambdaParam;
pub use sim::SimConfig;
