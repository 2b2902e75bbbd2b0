use clap::Args;
use eventsampling_core::series::{firing_probability, mgf_first_hitting, residual_moment_1, residual_moment_2};
use eventsampling_core::sim::simulate_hitting_statistics;
use eventsampling_core::LambdaParam;

use crate::output::Table;
use crate::Context;

#[derive(Args)]
pub struct HittingArgs {
    /// Half-width of the band (-δ, δ)
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Argument of E[exp(-s τ)]
    #[arg(long, default_value_t = 1.0)]
    s: f64,
}

pub fn run(args: &HittingArgs, ctx: &mut Context) -> anyhow::Result<&'static str> {
    let (d, t) = (args.delta, args.horizon);
    let cfg = ctx.file.series();
    let mc = simulate_hitting_statistics(d, t, args.s, &ctx.sim)?;
    let rows = [
        ("mean_residual", residual_moment_1(d, t, &cfg)?, mc.mean_residual, mc.mean_residual_se),
        ("mean_residual_sq", residual_moment_2(d, t, &cfg)?, mc.mean_residual_sq, mc.mean_residual_sq_se),
        ("p_fire", firing_probability(LambdaParam::from_delta(d, t)?, &cfg)?, mc.p_fire, mc.p_fire_se),
        ("mgf", mgf_first_hitting(args.s, d, 0.0)?, mc.mgf_at_s, mc.mgf_se),
    ];
    let mut table = Table::new(&["quantity", "series", "montecarlo", "montecarlo_se", "z"]);
    println!("quantity          series     montecarlo  se         z");
    for (name, series, est, se) in rows {
        let z = if se > 0.0 { Some((est - series) / se) } else { None };
        println!(
            "{name:<17} {series:.6}   {est:.6}    {se:.2e}   {}",
            z.map_or("-".into(), |z| format!("{z:+.2}"))
        );
        table.push(vec![name.into(), series.into(), est.into(), se.into(), z.into()]);
    }
    ctx.out.param("delta", d);
    ctx.out.param("horizon", t);
    ctx.out.param("s", args.s);
    ctx.out.table("hitting_stats", &table)?;
    Ok("hitting-stats")
}
