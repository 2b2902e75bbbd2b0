use eventsampling_core::bm::*;
use eventsampling_core::sim::{simulate_policy, trace_path, SimConfig};
use eventsampling_core::{PolicyVariant, ProcessModel, SeriesConfig};
use proptest::prelude::*;

fn rho_of(r: &BmPolicyResult) -> Vec<f64> {
    match &r.policy.variant {
        PolicyVariant::DeltaThresholds { rho, .. } => rho.clone(),
        _ => unreachable!(),
    }
}

#[test]
fn coefficient_ordering_up_to_fifty() {
    let cfg = SeriesConfig::default();
    let r = delta_recursion(1.0, 50, &cfg, &OptimizerConfig::default()).unwrap();
    let PolicyVariant::DeltaThresholds { c, .. } = &r.policy.variant else {
        unreachable!()
    };
    let (theta, _) = envelope_coefficients(50).unwrap();
    assert!(c.windows(2).all(|w| w[1] < w[0]));
    assert!(c.iter().all(|&v| v > 0.28));
    for n in 1..=50 {
        let uniform = 1.0 / (n + 1) as f64;
        assert!(theta[n] < c[n - 1].min(uniform), "N = {n}");
        if n >= 2 {
            assert!(c[n - 1] > uniform, "N = {n}");
        }
    }
    assert!((0.28..=0.30).contains(&c[49]));
}

#[test]
fn scaled_envelope_coefficient_decreases() {
    let (theta, _) = envelope_coefficients(60).unwrap();
    let scaled: Vec<f64> = (1..=60).map(|n| (n + 1) as f64 * theta[n]).collect();
    assert!(scaled.windows(2).all(|w| w[1] < w[0]));
    assert!((0.30..=0.40).contains(&scaled[39]));
}

#[test]
fn serial_and_parallel_scans_agree() {
    let cfg = SeriesConfig::default();
    let opt = OptimizerConfig::default();
    let par = minimize_stage_cost(-0.1, &cfg, &opt).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let ser = pool.install(|| minimize_stage_cost(-0.1, &cfg, &opt).unwrap());
    assert_eq!(par.0.to_bits(), ser.0.to_bits());
    assert_eq!(par.1.to_bits(), ser.1.to_bits());
}

#[test]
fn flat_objective_is_reported() {
    let opt = OptimizerConfig {
        lambda_min: 1e3,
        lambda_max: 1e4,
        ..OptimizerConfig::default()
    };
    let err = minimize_stage_cost(0.0, &SeriesConfig::default(), &opt).unwrap_err();
    assert!(err.to_string().contains("optimizer failed"));
}

proptest! {
    #[test]
    fn envelope_levels_shrink_to_zero(n in 1usize..30, t in 0.1f64..10.0) {
        let (_, gamma) = envelope_coefficients(n).unwrap();
        for g in gamma {
            let mut last = f64::INFINITY;
            for k in 0..=20 {
                let s = t * k as f64 / 20.0;
                let lvl = envelope_level(g, t, s);
                prop_assert!(lvl <= last);
                last = lvl;
            }
            prop_assert_eq!(envelope_level(g, t, t), 0.0);
        }
    }

    #[test]
    fn uniform_scale_law(t in 0.01f64..100.0, n in 1usize..20) {
        let r = deterministic_policy(t, n).unwrap();
        let want = t * t / (2.0 * (n + 1) as f64);
        prop_assert!((r.absolute_distortion() - want).abs() < 1e-12 * want);
    }
}

#[test]
fn envelope_policy_matches_recursion_by_simulation() {
    let model = ProcessModel::brownian(1.0).unwrap();
    let p = optimal_envelope_recursion(1.0, 1).unwrap();
    let r = simulate_policy(&model, &p.policy, &SimConfig::new(20_000, 1e-3, 31)).unwrap();
    let want = p.absolute_distortion();
    assert!((r.mean_distortion - want).abs() < 3.0 * r.std_error, "{} vs {want}", r.mean_distortion);
    // The 0.732 reading of the single-sample optimum is far outside the interval.
    assert!((r.distortion_coefficient - 0.732).abs() > 50.0 * r.coefficient_std_error);
}

#[test]
fn tabulated_thresholds_cost_what_the_exact_recursion_says() {
    let cfg = SeriesConfig::default();
    let tab = delta_recursion(1.0, 2, &cfg, &OptimizerConfig::default()).unwrap();
    let rho = rho_of(&tab);
    let exact = delta_policy_distortion(&rho, &cfg).unwrap();
    let model = ProcessModel::brownian(1.0).unwrap();
    let r = simulate_policy(&model, &tab.policy, &SimConfig::new(20_000, 1e-3, 77)).unwrap();
    assert!((r.distortion_coefficient - exact).abs() < 3.0 * r.coefficient_std_error);
    assert!((r.distortion_coefficient - tab.analytic_distortion).abs() > 10.0 * r.coefficient_std_error);
}

#[test]
fn delta_levels_rescale_with_remaining_time() {
    let cfg = SeriesConfig::default();
    let tab = delta_recursion(2.0, 3, &cfg, &OptimizerConfig::default()).unwrap();
    let rho = rho_of(&tab);
    let model = ProcessModel::brownian(2.0).unwrap();
    let sim = SimConfig::new(1, 1e-3, 0);
    for path in 0..20 {
        let rows = trace_path(&model, &tab.policy, &sim, path).unwrap();
        let mut zeta: f64 = 0.0;
        let mut remaining = 3;
        for w in rows.windows(2) {
            let (prev, row) = (w[0], w[1]);
            let is_sample = row.x == row.x_hat && row.x_hat != prev.x_hat;
            if is_sample && remaining > 0 {
                let err = (row.x_hat - prev.x_hat).abs();
                let level = rho[remaining - 1] * (2.0 - zeta).sqrt();
                assert!((err - level).abs() < 1e-9, "path {path}: {err} vs {level}");
                zeta = row.t;
                remaining -= 1;
            }
        }
    }
}
