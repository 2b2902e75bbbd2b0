use eventsampling_core::ou::*;
use eventsampling_core::sim::{simulate_policy, SimConfig};
use eventsampling_core::ProcessModel;

fn coarse() -> GridSpec {
    GridSpec {
        m_time: 400,
        x_half_width: 5.0,
        n_x: 201,
    }
}

#[test]
fn dp_values_are_even_in_the_state() {
    let sol = ou_dp_optimal(-1.0, 1.0, 2, &GridSpec::dp_default(-1.0)).unwrap();
    let v = &sol.values;
    let last = v.states.len() - 1;
    for row in &v.values {
        for i in 0..v.states.len() / 2 {
            assert!((row[i] - row[last - i]).abs() < 1e-10 * row[i].abs().max(1e-12));
        }
    }
}

#[test]
fn delta_cost_is_continuous_in_the_level() {
    let grid = coarse();
    let costs: Vec<f64> = (0..=40)
        .map(|i| ou_delta_distortion(0.5, 0.5 + 0.01 * i as f64, &grid).unwrap())
        .collect();
    for (i, w) in costs.windows(3).enumerate() {
        let curvature = w[0] - 2.0 * w[1] + w[2];
        assert!(curvature.abs() < 2e-4, "at {}: {curvature}", i + 1);
    }
}

#[test]
fn policy_ordering_for_both_drifts() {
    for a in [-1.0, 1.0] {
        let dp = ou_dp_optimal(a, 1.0, 2, &GridSpec::dp_default(a)).unwrap();
        let delta = ou_delta_optimize(a, 1.0, 2, &GridSpec::pde_default()).unwrap();
        for k in 0..2 {
            let det = ou_deterministic(a, 1.0, k + 1).unwrap();
            assert!(dp.distortions[k] < delta.distortions[k] * 1.001, "a {a} k {}", k + 1);
            assert!(delta.distortions[k] < det, "a {a} k {}", k + 1);
        }
    }
}

fn agree(model: &ProcessModel, policy: &eventsampling_core::PolicyArtifact, analytic: f64, seed: u64) {
    let r = simulate_policy(model, policy, &SimConfig::new(20_000, 1e-3, seed)).unwrap();
    let z = (r.mean_distortion - analytic) / r.std_error;
    assert!(z.abs() < 3.5, "{}: analytic {analytic}, MC {} ± {}", policy.id(), r.mean_distortion, r.std_error);
}

#[test]
fn dp_policy_cost_matches_simulation() {
    for (a, n) in [(-1.0, 1), (1.0, 1), (-1.0, 2)] {
        let sol = ou_dp_optimal(a, 1.0, n, &GridSpec::dp_default(a)).unwrap();
        agree(&ProcessModel::ornstein_uhlenbeck(a, 1.0).unwrap(), &sol.policy, sol.distortion, 5);
    }
}

#[test]
fn delta_policy_cost_matches_simulation() {
    let r = ou_delta_optimize(-1.0, 1.0, 2, &GridSpec::pde_default()).unwrap();
    agree(&ProcessModel::ornstein_uhlenbeck(-1.0, 1.0).unwrap(), &r.policy, r.distortions[1], 6);
}

#[test]
fn horizon_scaling() {
    // a T fixed: distortion scales as T^2.
    let short = ou_deterministic(-2.0, 0.5, 2).unwrap();
    let long = ou_deterministic(-1.0, 1.0, 2).unwrap();
    assert!((long - 4.0 * short).abs() < 1e-12);
}
