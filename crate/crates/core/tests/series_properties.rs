use eventsampling_core::series::*;
use eventsampling_core::sim::{simulate_hitting_statistics, SimConfig};
use eventsampling_core::SeriesConfig;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

fn lp(l: f64) -> LambdaParam {
    LambdaParam::new(l).unwrap()
}

#[test]
fn phi_and_psi_ranges_on_log_grid() {
    let c = cfg();
    let mut min_phi = f64::INFINITY;
    for i in 0..=400 {
        let l = 10f64.powf(-3.0 + 8.0 * i as f64 / 400.0);
        let p = phi(lp(l), &c).unwrap();
        let q = psi(lp(l), &c).unwrap();
        assert!(p > 0.0 && p < 1.01, "phi({l}) = {p}");
        assert!(q > -2.01 && q < 0.01, "psi({l}) = {q}");
        min_phi = min_phi.min(p);
    }
    assert!((min_phi - 0.3953).abs() < 5e-4);
}

#[test]
fn single_sample_cost_identity_on_log_grid() {
    let c = cfg();
    let t = 1.3;
    for i in 0..100 {
        let l = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
        let delta = (t * PI * PI / (8.0 * l)).sqrt();
        let lhs = t * t / 2.0 - delta * delta * residual_moment_1(delta, t, &c).unwrap();
        let rhs = t * t / 2.0 * phi(lp(l), &c).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "lambda {l}: {lhs} vs {rhs}");
    }
}

#[test]
fn firing_probability_monotone_in_lambda() {
    let c = cfg();
    let mut last = -1.0;
    for i in 0..300 {
        let l = 10f64.powf(-3.0 + 7.0 * i as f64 / 299.0);
        let p = firing_probability(lp(l), &c).unwrap();
        assert!(p >= last - 1e-15);
        last = p;
    }
}

#[test]
fn delta_lambda_round_trip() {
    for &(d, t) in &[(0.3, 1.0), (0.9391, 1.0), (2.0, 5.0)] {
        let l = lambda_from_delta(d, t);
        assert!((delta_from_lambda(l, t) - d).abs() < 1e-14 * d.max(1.0));
    }
}

proptest! {
    #[test]
    fn mgf_lies_in_unit_interval(s in 0.0f64..1e6, delta in 0.01f64..10.0, frac in -1.0f64..=1.0) {
        let v = mgf_first_hitting(s, delta, frac * delta).unwrap();
        prop_assert!(v > 0.0 || s * delta * delta > 1e4);
        prop_assert!(v <= 1.0 + 1e-15);
    }

    #[test]
    fn psi_relates_to_second_moment(l in 0.05f64..50.0, t in 0.1f64..10.0) {
        let c = cfg();
        let delta = delta_from_lambda(l, t);
        let m2 = residual_moment_2(delta, t, &c).unwrap();
        let q = psi(lp(l), &c).unwrap();
        prop_assert!((q + 2.0 * m2 / (t * t)).abs() < 1e-9);
    }

    #[test]
    fn moments_are_ordered(l in 0.05f64..50.0) {
        // (T - τ)^+ lies in [0, T], so E[R^2] <= T E[R] and E[R] <= T P[τ <= T].
        let c = cfg();
        let delta = delta_from_lambda(l, 1.0);
        let m1 = residual_moment_1(delta, 1.0, &c).unwrap();
        let m2 = residual_moment_2(delta, 1.0, &c).unwrap();
        let p = firing_probability(lp(l), &c).unwrap();
        prop_assert!(m2 <= m1 + 1e-12);
        prop_assert!(m1 <= p + 1e-12);
        prop_assert!(m2 >= m1 * m1 - 1e-12);
    }
}

#[test]
fn series_agree_with_path_oracle() {
    let c = cfg();
    let mc = simulate_hitting_statistics(1.0, 1.0, 1.0, &SimConfig::new(100_000, 1e-3, 2024)).unwrap();
    let l = lp(lambda_from_delta(1.0, 1.0));
    let checks = [
        ("P", firing_probability(l, &c).unwrap(), mc.p_fire, mc.p_fire_se),
        ("M1", residual_moment_1(1.0, 1.0, &c).unwrap(), mc.mean_residual, mc.mean_residual_se),
        ("M2", residual_moment_2(1.0, 1.0, &c).unwrap(), mc.mean_residual_sq, mc.mean_residual_sq_se),
        ("MGF", mgf_first_hitting(1.0, 1.0, 0.0).unwrap(), mc.mgf_at_s, mc.mgf_se),
    ];
    for (name, series, est, se) in checks {
        assert!((series - est).abs() < 3.0 * se, "{name}: series {series}, MC {est} ± {se}");
    }
}
