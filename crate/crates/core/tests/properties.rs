//! Randomized algebraic properties: things that must hold on whole parameter
//! regions, not just at the worked reference points.

use bowley_core::growth::{eval_exponential, eval_logistic, fit_exponential, fit_logistic};
use bowley_core::invariants::{
    beta_given_alpha, classify_returns, crs_elasticities, eval_cobb_douglas,
    general_invariant_value, psi_forward, psi_inverse, solve_production_from_invariant,
    CobbDouglas, ReturnsClassification,
};
use bowley_core::lsq::NlsOptions;
use bowley_core::shares::summarize;
use proptest::prelude::*;

fn rel(found: f64, reference: f64) -> f64 {
    (found - reference).abs() / reference.abs().max(1e-300)
}

proptest! {
    #[test]
    fn psi_round_trips(
        n in 1.0f64..1e6,
        fraction in 1e-6f64..50.0,
    ) {
        let x = fraction * n;
        let squashed = psi_forward(&[n], &[x]).unwrap();
        prop_assert!(squashed[0] < n);
        let back = psi_inverse(&[n], &squashed).unwrap();
        prop_assert!(rel(back[0], x) < 1e-12);
    }

    #[test]
    fn orthogonal_exponents_freeze_the_invariant(
        b in prop::array::uniform3(0.01f64..0.1),
        seed in prop::array::uniform3(-1.5f64..1.5),
        x0 in prop::array::uniform3(1.0f64..10.0),
        t in 0.0f64..30.0,
    ) {
        let dot: f64 = seed.iter().zip(&b).map(|(s, r)| s * r).sum();
        let bb: f64 = b.iter().map(|r| r * r).sum();
        let mut a = seed;
        for i in 0..3 {
            a[i] -= dot / bb * b[i];
        }
        prop_assume!(a.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.05);
        let x: Vec<f64> = (0..3).map(|i| eval_exponential(b[i], x0[i], t)).collect();
        let at_t = general_invariant_value(&x0, &a, &x).unwrap();
        let at_origin = general_invariant_value(&x0, &a, &x0).unwrap();
        prop_assert!(rel(at_t, at_origin) < 1e-9, "{at_t} vs {at_origin}");
    }

    #[test]
    fn crs_pair_is_consistent_with_its_classification(
        b in prop::array::uniform3(0.001f64..0.2),
    ) {
        prop_assume!((b[0] - b[1]).abs() > 1e-6);
        prop_assume!((b[2] - b[0]).abs() > 1e-6 && (b[2] - b[1]).abs() > 1e-6);
        let sol = crs_elasticities(b);
        // Near-ties in the input rates inflate the elasticities, so the
        // identity bounds scale with their size.
        let size = 1.0 + sol.alpha.abs() + sol.beta.abs();
        prop_assert!((sol.alpha + sol.beta - 1.0).abs() < 1e-12 * size);
        let classified = classify_returns(b).unwrap();
        prop_assert_eq!(sol.classification, classified);
        if classified == ReturnsClassification::CrsAttainable {
            prop_assert!(sol.alpha > 0.0 && sol.beta > 0.0);
        }
        // Pinning alpha at the CRS value must return the CRS beta.
        let pinned = beta_given_alpha(b, sol.alpha).unwrap();
        prop_assert!((pinned - sol.beta).abs() < 1e-9 * size);
    }

    #[test]
    fn noise_free_exponential_fit_is_exact(
        b in prop::sample::select(vec![-0.08f64, -0.02, 0.01, 0.04, 0.09]),
        x0 in 0.5f64..500.0,
    ) {
        let ts: Vec<f64> = (0..12).map(f64::from).collect();
        let xs: Vec<f64> = ts.iter().map(|&t| eval_exponential(b, x0, t)).collect();
        let fit = fit_exponential(&ts, &xs).unwrap();
        prop_assert!(rel(fit.b, b) < 1e-9, "rate {} vs {b}", fit.b);
        prop_assert!(rel(fit.x0, x0) < 1e-9);
        prop_assert!(fit.rss_log < 1e-18);
    }

    #[test]
    fn noise_free_logistic_fit_recovers_generator(
        b in 0.06f64..0.15,
        n in 50.0f64..500.0,
        start_fraction in 0.02f64..0.5,
    ) {
        let x0 = start_fraction * n;
        let ts: Vec<f64> = (0..70).map(f64::from).collect();
        let xs: Vec<f64> = ts.iter().map(|&t| eval_logistic(b, x0, n, t)).collect();
        let fit = fit_logistic(&ts, &xs, None, &NlsOptions::default()).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(rel(fit.b, b) < 1e-5, "rate {} vs {b}", fit.b);
        prop_assert!(rel(fit.x0, x0) < 1e-5);
        prop_assert!(rel(fit.n, n) < 1e-5);
    }

    #[test]
    fn invariant_level_solves_back_the_surface(
        scale in 0.2f64..3.0,
        alpha in 0.1f64..0.9,
        beta in 0.1f64..0.9,
        l0 in 1.0f64..10.0,
        k0 in 1.0f64..10.0,
        l in 0.5f64..300.0,
        k in 0.5f64..300.0,
    ) {
        let cd = CobbDouglas { scale, alpha, beta };
        let y0 = eval_cobb_douglas(&cd, l0, k0).unwrap();
        let origin = [l0, k0, y0];
        let exponents = [alpha, beta, -1.0];
        let level = general_invariant_value(&origin, &exponents, &origin).unwrap();
        let solved = solve_production_from_invariant(&origin, &exponents, level, l, k).unwrap();
        let direct = eval_cobb_douglas(&cd, l, k).unwrap();
        prop_assert!(rel(solved, direct) < 1e-9, "{solved} vs {direct}");
    }

    #[test]
    fn constant_share_series_summarizes_to_zero_range(
        value in 0.05f64..0.95,
        len in 2usize..40,
    ) {
        let series = vec![value; len];
        let summary = summarize(&series).unwrap();
        // Summing n identical values leaves the mean a few ulps off (up to
        // ~n·ε relative), so "zero" here means float-level zero.
        let wobble = len as f64 * f64::EPSILON * value;
        prop_assert_eq!(summary.relative_range, 0.0);
        prop_assert!(summary.max_abs_deviation <= wobble);
        prop_assert!((summary.mean - value).abs() <= wobble);
    }
}
