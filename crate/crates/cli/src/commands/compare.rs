use clap::Args;
use eventsampling_core::bm::{
    deterministic_policy, delta_policy_distortion, delta_recursion_with, optimal_envelope_recursion, DeltaConvention,
};
use eventsampling_core::ou::{ou_delta_optimize, ou_deterministic, ou_dp_optimal};
use eventsampling_core::{normalize_ou, PolicyArtifact, PolicyVariant};

use super::{check, model};
use crate::output::Table;
use crate::{Context, Convention, Process};

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    process: Process,
    /// OU drift
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=100))]
    n_max: u64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Delta recursion used for the Brownian delta column
    #[arg(long, value_enum, default_value_t = Convention::Tabulated)]
    delta_convention: Convention,
    /// Skip the Monte Carlo columns
    #[arg(long)]
    skip_mc: bool,
}

struct Family {
    /// Distortion coefficients for budgets 1..N.
    coefficients: Vec<f64>,
    /// Cost of actually running the stored policy, when it differs from `coefficients`.
    policy_cost: Vec<f64>,
    policy: PolicyArtifact,
}

pub fn run(args: &CompareArgs, ctx: &mut Context) -> anyhow::Result<&'static str> {
    let n = args.n_max as usize;
    let t = args.horizon;
    let scale = t * t / 2.0;
    let model = model(args.process, args.a, t)?;
    let series = ctx.file.series();

    let (det, delta, opt) = match args.process {
        Process::Bm => {
            let convention = match args.delta_convention {
                Convention::Tabulated => DeltaConvention::Tabulated,
                Convention::Exact => DeltaConvention::Exact,
            };
            let rec = delta_recursion_with(t, n, convention, &series, &ctx.file.optimizer())?;
            let PolicyVariant::DeltaThresholds { rho, c, .. } = &rec.policy.variant else {
                unreachable!("delta recursion returns delta thresholds")
            };
            let policy_cost = (1..=n)
                .map(|k| delta_policy_distortion(&rho[..k], &series))
                .collect::<Result<Vec<_>, _>>()?;
            let coefficients = match convention {
                DeltaConvention::Tabulated => c.clone(),
                DeltaConvention::Exact => policy_cost.clone(),
            };
            let env = optimal_envelope_recursion(t, n)?;
            let PolicyVariant::OptimalEnvelope { theta, .. } = &env.policy.variant else {
                unreachable!("envelope recursion returns an envelope")
            };
            let uniform: Vec<f64> = (1..=n).map(|k| 1.0 / (k + 1) as f64).collect();
            (
                Family {
                    policy_cost: uniform.clone(),
                    coefficients: uniform,
                    policy: deterministic_policy(t, n)?.policy,
                },
                Family {
                    coefficients,
                    policy_cost,
                    policy: rec.policy,
                },
                Family {
                    coefficients: theta[1..].to_vec(),
                    policy_cost: theta[1..].to_vec(),
                    policy: env.policy,
                },
            )
        }
        Process::Ou => {
            let a = model.drift_a;
            let det: Vec<f64> = (1..=n)
                .map(|k| ou_deterministic(a, t, k).map(|d| d / scale))
                .collect::<Result<_, _>>()?;
            let d = ou_delta_optimize(a, t, n, &ctx.file.pde_grid())?;
            let dp = ou_dp_optimal(a, t, n, &ctx.file.dp_grid(normalize_ou(a, t)))?;
            let delta: Vec<f64> = d.distortions.iter().map(|v| v / scale).collect();
            let opt: Vec<f64> = dp.distortions.iter().map(|v| v / scale).collect();
            (
                Family {
                    policy_cost: det.clone(),
                    coefficients: det,
                    policy: deterministic_policy(t, n)?.policy,
                },
                Family {
                    policy_cost: delta.clone(),
                    coefficients: delta,
                    policy: d.policy,
                },
                Family {
                    policy_cost: opt.clone(),
                    coefficients: opt,
                    policy: dp.policy,
                },
            )
        }
    };

    let mut table = Table::new(&[
        "N",
        "deterministic",
        "delta",
        "optimal",
        "delta_policy",
        "deterministic_mc",
        "deterministic_mc_se",
        "delta_mc",
        "delta_mc_se",
        "optimal_mc",
        "optimal_mc_se",
        "deterministic_abs",
        "delta_abs",
        "optimal_abs",
    ]);
    println!("N    deterministic  delta    optimal   (coefficients of T^2/2)");
    for k in 1..=n {
        let mut mc = Vec::new();
        for fam in [&det, &delta, &opt] {
            let r = check(ctx, &model, &fam.policy.restrict_budget(k)?, args.skip_mc)?;
            mc.push(r.map(|r| (r.distortion_coefficient, r.coefficient_std_error)));
        }
        let (d, l, o) = (det.coefficients[k - 1], delta.coefficients[k - 1], opt.coefficients[k - 1]);
        println!("{k:<4} {d:.5}        {l:.5}  {o:.5}");
        table.push(vec![
            k.into(),
            d.into(),
            l.into(),
            o.into(),
            delta.policy_cost[k - 1].into(),
            mc[0].map(|m| m.0).into(),
            mc[0].map(|m| m.1).into(),
            mc[1].map(|m| m.0).into(),
            mc[1].map(|m| m.1).into(),
            mc[2].map(|m| m.0).into(),
            mc[2].map(|m| m.1).into(),
            (d * scale).into(),
            (l * scale).into(),
            (o * scale).into(),
        ]);
    }
    ctx.out.param("process", args.process);
    if let Some(a) = args.a {
        ctx.out.param("a", a);
    }
    ctx.out.param("n-max", n);
    ctx.out.param("horizon", t);
    ctx.out.param("skip-mc", args.skip_mc);
    if args.process == Process::Bm {
        ctx.out.param("delta-convention", format!("{:?}", args.delta_convention).to_lowercase());
    } else {
        let pde = ctx.file.pde_grid();
        let dp = ctx.file.dp_grid(normalize_ou(model.drift_a, t));
        ctx.out.param("pde-grid", format!("{}x{} half-width {}", pde.m_time, pde.n_x, pde.x_half_width));
        ctx.out.param("dp-grid", format!("{}x{} half-width {}", dp.m_time, dp.n_x, dp.x_half_width));
    }
    ctx.out.table("compare", &table)?;
    Ok("compare")
}
