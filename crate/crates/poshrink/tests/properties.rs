//! Randomized invariants via proptest.

use proptest::prelude::*;

use poshrink::closed_form::log_predictive_power;
use poshrink::experiments::{kl_distance, ws_distance};
use poshrink::prior::{FPrior, Family};
use poshrink::problem::{
    derive_gamma, lambda_from_theta, theta_from_lambda, CountVector, ProblemSpec, ThetaPoint,
};

fn pos(range: std::ops::Range<f64>) -> impl Strategy<Value = f64> {
    range.prop_map(|v| v.max(1e-6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_lambda_round_trip(
        lam in prop::collection::vec(pos(0.001..50.0), 1..6),
        r in pos(0.1..5.0),
        s in pos(0.1..5.0),
    ) {
        let d = lam.len();
        let spec = ProblemSpec::uniform(d, r, s).unwrap();
        let theta = theta_from_lambda(&lam, spec.gamma()).unwrap();
        let back = lambda_from_theta(&theta, spec.gamma()).unwrap();
        for (a, b) in lam.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn gamma_is_in_range(
        r in prop::collection::vec(pos(0.05..20.0), 1..6),
        s in pos(0.05..20.0),
    ) {
        let d = r.len();
        let gamma = derive_gamma(&r, &vec![s; d]).unwrap();
        for (g, ri) in gamma.iter().zip(&r) {
            // gamma_i = 1/r_i - 1/(r_i + s_i) lies strictly inside (0, 1/r_i)
            prop_assert!(*g > 0.0 && *g < 1.0 / ri);
        }
    }

    #[test]
    fn sign_symmetric_families_ignore_signs(
        theta in prop::collection::vec(0.01f64..5.0, 3),
        signs in prop::collection::vec(prop::bool::ANY, 3),
    ) {
        let priors = [
            FPrior::new(
                Family::ShiftPoint { alpha: 0.5, eta: 0.3 },
                vec![0.5; 3],
                0.0,
                3,
            )
            .unwrap(),
            FPrior::new(
                Family::SymPoint { alpha: 0.5, center: vec![1.0, 2.0, 0.5] },
                vec![0.5; 3],
                0.0,
                3,
            )
            .unwrap(),
            FPrior::new(
                Family::CoordSubspace { alpha: 0.5, indices: vec![0, 1, 2] },
                vec![0.5; 3],
                1e-4,
                3,
            )
            .unwrap(),
        ];
        let flipped: Vec<f64> = theta
            .iter()
            .zip(&signs)
            .map(|(t, s)| if *s { -t } else { *t })
            .collect();
        for prior in &priors {
            let a = prior.eval_log_f(&ThetaPoint(theta.clone())).unwrap();
            let b = prior.eval_log_f(&ThetaPoint(flipped.clone())).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn power_predictive_is_a_log_probability(
        x in prop::collection::vec(0u64..20, 1..4),
        y in prop::collection::vec(0u64..20, 1..4),
        r in pos(0.2..3.0),
        s in pos(0.2..3.0),
        beta in pos(0.1..2.0),
    ) {
        let d = x.len().min(y.len());
        let spec = ProblemSpec::uniform(d, r, s).unwrap();
        let lp = log_predictive_power(
            &CountVector(x[..d].to_vec()),
            &CountVector(y[..d].to_vec()),
            &vec![beta; d],
            &spec,
        )
        .unwrap();
        prop_assert!(lp <= 1e-12, "log p = {lp}");
        prop_assert!(lp.is_finite());
    }

    #[test]
    fn forecast_metrics_are_nonnegative_and_zero_at_truth(
        y in prop::collection::vec(0u64..50, 1..6),
        jitter in prop::collection::vec(0.0f64..3.0, 1..6),
    ) {
        let d = y.len().min(jitter.len());
        let y = CountVector(y[..d].to_vec());
        let y_hat: Vec<f64> = y
            .as_slice()
            .iter()
            .zip(&jitter)
            .map(|(yi, j)| *yi as f64 + j)
            .collect();
        prop_assert!(kl_distance(&y_hat, &y) >= 0.0);
        prop_assert!(ws_distance(&y_hat, &y) >= 0.0);
        let exact: Vec<f64> = y.as_slice().iter().map(|v| *v as f64).collect();
        prop_assert_eq!(kl_distance(&exact, &y), 0.0);
        prop_assert_eq!(ws_distance(&exact, &y), 0.0);
    }
}
