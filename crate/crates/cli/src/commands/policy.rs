use clap::{ArgGroup, Args};
use eventsampling_core::bm::{deterministic_policy, delta_recursion_with, optimal_envelope_recursion, DeltaConvention};
use eventsampling_core::ou::{ou_delta_optimize, ou_deterministic, ou_dp_optimal};
use eventsampling_core::{normalize_ou, PolicyArtifact};

use super::model;
use crate::output::Table;
use crate::{Context, Convention, Process};

#[derive(Args)]
#[command(group(ArgGroup::new("family").required(true).args(["deterministic", "delta", "optimal"])))]
pub struct PolicyArgs {
    #[arg(value_enum)]
    process: Process,
    /// OU drift
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Sample budget
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=500))]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Uniform sample times
    #[arg(long)]
    deterministic: bool,
    /// Threshold (Delta) sampling
    #[arg(long)]
    delta: bool,
    /// Optimal stopping envelope
    #[arg(long)]
    optimal: bool,
    #[arg(long, value_enum, default_value_t = Convention::Tabulated)]
    delta_convention: Convention,
}

pub fn run(args: &PolicyArgs, ctx: &mut Context) -> anyhow::Result<&'static str> {
    let n = args.n as usize;
    let t = args.horizon;
    let m = model(args.process, args.a, t)?;
    let scale = t * t / 2.0;
    let family = if args.deterministic {
        "deterministic"
    } else if args.delta {
        "delta"
    } else {
        "optimal"
    };

    let (policy, coefficient, expected_samples): (PolicyArtifact, f64, Option<f64>) = match args.process {
        Process::Bm => {
            let r = match family {
                "deterministic" => deterministic_policy(t, n)?,
                "delta" => {
                    let conv = match args.delta_convention {
                        Convention::Tabulated => DeltaConvention::Tabulated,
                        Convention::Exact => DeltaConvention::Exact,
                    };
                    delta_recursion_with(t, n, conv, &ctx.file.series(), &ctx.file.optimizer())?
                }
                _ => optimal_envelope_recursion(t, n)?,
            };
            (r.policy, r.analytic_distortion, r.expected_samples)
        }
        Process::Ou => {
            let a = m.drift_a;
            match family {
                "deterministic" => (deterministic_policy(t, n)?.policy, ou_deterministic(a, t, n)? / scale, None),
                "delta" => {
                    let r = ou_delta_optimize(a, t, n, &ctx.file.pde_grid())?;
                    (r.policy, r.distortions[n - 1] / scale, None)
                }
                _ => {
                    let r = ou_dp_optimal(a, t, n, &ctx.file.dp_grid(normalize_ou(a, t)))?;
                    (r.policy, r.distortion / scale, None)
                }
            }
        }
    };

    println!(
        "{} for {}: distortion coefficient {coefficient:.6}, absolute {:.6}",
        policy.id(),
        m.kind_name(),
        coefficient * scale
    );
    let mut summary = Table::new(&[
        "process",
        "a",
        "kind",
        "budget",
        "horizon",
        "distortion_coefficient",
        "distortion_absolute",
        "expected_samples",
    ]);
    summary.push(vec![
        args.process.to_string().into(),
        args.a.into(),
        policy.kind().into(),
        n.into(),
        t.into(),
        coefficient.into(),
        (coefficient * scale).into(),
        expected_samples.into(),
    ]);
    ctx.out.param("process", args.process);
    if let Some(a) = args.a {
        ctx.out.param("a", a);
    }
    ctx.out.param("n", n);
    ctx.out.param("horizon", t);
    ctx.out.param("family", family);
    match (args.process, family) {
        (Process::Bm, "delta") => ctx.out.param("delta-convention", format!("{:?}", args.delta_convention).to_lowercase()),
        (Process::Ou, "delta") => {
            let g = ctx.file.pde_grid();
            ctx.out.param("pde-grid", format!("{}x{} half-width {}", g.m_time, g.n_x, g.x_half_width));
        }
        (Process::Ou, "optimal") => {
            let g = ctx.file.dp_grid(normalize_ou(m.drift_a, t));
            ctx.out.param("dp-grid", format!("{}x{} half-width {}", g.m_time, g.n_x, g.x_half_width));
        }
        _ => {}
    }
    ctx.out.json("policy.json", &policy)?;
    ctx.out.table("policy_summary", &summary)?;
    Ok("policy")
}
