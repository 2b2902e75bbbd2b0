use clap::Args;
use eventsampling_core::sim::{poisson_demo, poisson_demo_paths};

use crate::output::Table;
use crate::Context;

#[derive(Args)]
pub struct PoissonArgs {
    /// Jump rate, also the periodic sampling rate
    #[arg(long, default_value_t = 2.0)]
    rate: f64,
    #[arg(long, default_value_t = 5.0)]
    horizon: f64,
}

pub fn run(args: &PoissonArgs, ctx: &mut Context) -> anyhow::Result<&'static str> {
    let paths = poisson_demo_paths(args.rate, args.horizon, &ctx.sim)?;
    let r = poisson_demo(args.rate, args.horizon, &ctx.sim)?;
    println!(
        "jump-triggered: distortion {} at {:.4} ± {:.4} samples per unit time; periodic: distortion {:.4} ± {:.4}",
        r.adaptive_distortion, r.adaptive_rate, r.adaptive_rate_se, r.deterministic_distortion, r.deterministic_distortion_se
    );

    let mut per_path = Table::new(&["path", "adaptive_distortion", "deterministic_distortion", "adaptive_samples"]);
    for p in &paths {
        per_path.push(vec![
            p.path.into(),
            p.adaptive_distortion.into(),
            p.deterministic_distortion.into(),
            p.adaptive_samples.into(),
        ]);
    }
    let mut summary = Table::new(&[
        "rate",
        "horizon",
        "n_paths",
        "adaptive_distortion",
        "adaptive_distortion_se",
        "deterministic_distortion",
        "deterministic_distortion_se",
        "adaptive_rate",
        "adaptive_rate_se",
    ]);
    summary.push(vec![
        r.rate.into(),
        r.horizon.into(),
        r.n_paths.into(),
        r.adaptive_distortion.into(),
        r.adaptive_distortion_se.into(),
        r.deterministic_distortion.into(),
        r.deterministic_distortion_se.into(),
        r.adaptive_rate.into(),
        r.adaptive_rate_se.into(),
    ]);
    ctx.out.param("rate", args.rate);
    ctx.out.param("horizon", args.horizon);
    ctx.out.table("poisson_paths", &per_path)?;
    ctx.out.table("poisson_summary", &summary)?;
    Ok("poisson-demo")
}
