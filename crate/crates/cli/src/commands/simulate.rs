use std::path::PathBuf;

use anyhow::Context as _;
use clap::Args;
use eventsampling_core::sim::{simulate_policy, trace_path};
use eventsampling_core::PolicyArtifact;

use super::model;
use crate::output::{Format, Table};
use crate::{Context, Process, UsageError};

#[derive(Args)]
pub struct SimulateArgs {
    /// Policy JSON written by `policy`
    #[arg(long)]
    policy: PathBuf,
    #[arg(long, value_enum, default_value_t = Process::Bm)]
    process: Process,
    /// OU drift
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Also dump the path with this index as CSV (t, x, x_hat, cumulative_distortion)
    #[arg(long)]
    trace: Option<usize>,
}

pub fn run(args: &SimulateArgs, ctx: &mut Context) -> anyhow::Result<&'static str> {
    let text = std::fs::read_to_string(&args.policy)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", args.policy.display())))?;
    let policy: PolicyArtifact = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("{} is not a policy: {e}", args.policy.display())))?;
    let m = model(args.process, args.a, policy.horizon)?;
    let r = simulate_policy(&m, &policy, &ctx.sim).with_context(|| format!("simulating {}", policy.id()))?;
    println!(
        "{} on {}: distortion {:.6} ± {:.6} (coefficient {:.6} ± {:.6}), samples {:.4}",
        r.policy_id,
        m.kind_name(),
        r.mean_distortion,
        r.std_error,
        r.distortion_coefficient,
        r.coefficient_std_error,
        r.mean_samples_used
    );

    ctx.out.param("policy", args.policy.display());
    ctx.out.param("process", args.process);
    if let Some(a) = args.a {
        ctx.out.param("a", a);
    }
    match ctx.out.format {
        Format::Json => ctx.out.json("simulation.json", &r)?,
        Format::Csv => {
            let mut t = Table::new(&[
                "policy_id",
                "seed",
                "n_paths",
                "dt",
                "horizon",
                "mean_distortion",
                "std_error",
                "distortion_coefficient",
                "coefficient_std_error",
                "mean_samples_used",
                "samples_std_error",
            ]);
            t.push(vec![
                r.policy_id.clone().into(),
                crate::output::Cell::Int(r.seed),
                r.n_paths.into(),
                r.dt.into(),
                r.horizon.into(),
                r.mean_distortion.into(),
                r.std_error.into(),
                r.distortion_coefficient.into(),
                r.coefficient_std_error.into(),
                r.mean_samples_used.into(),
                r.samples_std_error.into(),
            ]);
            ctx.out.table("simulation", &t)?;
        }
    }
    if let Some(path) = args.trace {
        if path >= ctx.sim.n_paths {
            return Err(UsageError(format!("--trace {path} is beyond --paths {}", ctx.sim.n_paths)).into());
        }
        let rows = trace_path(&m, &policy, &ctx.sim, path)?;
        let mut t = Table::new(&["t", "x", "x_hat", "cumulative_distortion"]);
        for row in rows {
            t.push(vec![row.t.into(), row.x.into(), row.x_hat.into(), row.cumulative_distortion.into()]);
        }
        ctx.out.param("trace", path);
        ctx.out.table_as(&format!("trace_{path}"), &t, Format::Csv)?;
    }
    Ok("simulate")
}
