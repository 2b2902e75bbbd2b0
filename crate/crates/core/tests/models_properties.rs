use eventsampling_core::{mmse_reconstruct, normalize_ou, PolicyArtifact, ProcessModel};
use eventsampling_core::bm::{delta_recursion, optimal_envelope_recursion, OptimizerConfig};
use eventsampling_core::SeriesConfig;
use proptest::prelude::*;

fn samples_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, -3.0f64..3.0), 0..6).prop_map(|mut v| {
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    })
}

proptest! {
    #[test]
    fn weak_drift_reconstruction_matches_brownian(samples in samples_strategy(), t in 0.0f64..=1.0) {
        let bm = ProcessModel::brownian(1.0).unwrap();
        let ou = ProcessModel::ornstein_uhlenbeck(1e-8, 1.0).unwrap();
        let a = mmse_reconstruct(&bm, &samples, t).unwrap();
        let b = mmse_reconstruct(&ou, &samples, t).unwrap();
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn reconstruction_is_right_continuous_at_samples(samples in samples_strategy(), a in -2.0f64..2.0) {
        let ou = ProcessModel::ornstein_uhlenbeck(a, 1.0).unwrap();
        for &(ts, _) in &samples {
            let at = mmse_reconstruct(&ou, &samples, ts).unwrap();
            let last_at_ts = samples.iter().rev().find(|s| s.0 == ts).unwrap().1;
            prop_assert_eq!(at, last_at_ts);
            let after = mmse_reconstruct(&ou, &samples, (ts + 1e-9).min(1.0)).unwrap();
            if ts + 1e-9 <= 1.0 && samples.iter().all(|s| s.0 <= ts || s.0 > ts + 1e-9) {
                prop_assert!((after - at).abs() < 1e-7 * (1.0 + at.abs()));
            }
        }
    }

    #[test]
    fn normalization_is_scale_free(a in -5.0f64..5.0, t in 0.01f64..10.0, k in 0.1f64..10.0) {
        let x = normalize_ou(a, t);
        let y = normalize_ou(a / k, t * k);
        prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn artifacts_round_trip_through_json() {
    let cfg = SeriesConfig::default();
    let list = [
        delta_recursion(1.5, 3, &cfg, &OptimizerConfig::default()).unwrap().policy,
        optimal_envelope_recursion(1.5, 3).unwrap().policy,
    ];
    for p in list {
        let s = serde_json::to_string(&p).unwrap();
        let back: PolicyArtifact = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.id(), p.id());
    }
}
