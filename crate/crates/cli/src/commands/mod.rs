pub mod compare;
pub mod hitting;
pub mod poisson;
pub mod policy;
pub mod simulate;
pub mod table1;

use eventsampling_core::sim::simulate_policy;
use eventsampling_core::{PolicyArtifact, ProcessModel, SimulationReport};

use crate::{Context, Process, UsageError};

pub fn model(process: Process, a: Option<f64>, horizon: f64) -> anyhow::Result<ProcessModel> {
    Ok(match (process, a) {
        (Process::Bm, None) => ProcessModel::brownian(horizon)?,
        (Process::Bm, Some(_)) => return Err(UsageError("--a applies only to --process ou".into()).into()),
        (Process::Ou, Some(a)) => ProcessModel::ornstein_uhlenbeck(a, horizon)?,
        (Process::Ou, None) => return Err(UsageError("--process ou needs --a".into()).into()),
    })
}

/// Monte Carlo check of one policy, or `None` when checks are switched off.
pub fn check(ctx: &Context, model: &ProcessModel, policy: &PolicyArtifact, skip: bool) -> anyhow::Result<Option<SimulationReport>> {
    if skip {
        return Ok(None);
    }
    let r = simulate_policy(model, policy, &ctx.sim)?;
    log::info!("{}: {} ± {}", r.policy_id, r.distortion_coefficient, r.coefficient_std_error);
    Ok(Some(r))
}
