mod common;

use common::*;
use kmest_core::inference::{
    band_constant, band_constant_estimate, bridge_sup_tail, ci_pointwise_log, confidence_band,
    kolmogorov_quantile, McParams,
};
use kmest_core::product_limit::fit;
use proptest::prelude::*;

#[test]
fn tail_strictly_decreasing() {
    let mut prev = bridge_sup_tail(0.05);
    for i in 2..=300 {
        let c = 0.05 * i as f64 * 0.1 + 0.05;
        let t = bridge_sup_tail(c);
        assert!(t <= prev);
        // saturates at exactly 1.0 for small c and underflows for large c
        if prev < 1.0 && t > 0.0 {
            assert!(t < prev, "tail({c}) = {t} not below {prev}");
        }
        prev = t;
    }
}

#[test]
fn band_constant_monotone_in_alpha_and_interval() {
    let mc = McParams {
        paths: 5_000,
        grid_points: 512,
        seed: 13,
    };
    let mut last = f64::INFINITY;
    for alpha in [0.01, 0.05, 0.1, 0.2, 0.5] {
        let c = band_constant_estimate(0.1, 0.8, alpha, &mc).unwrap().value;
        assert!(c <= last);
        last = c;
    }
    let widths = [(0.4, 0.5), (0.3, 0.6), (0.2, 0.6), (0.1, 0.9), (0.01, 0.99)];
    let mut last = 0.0;
    for (a, b) in widths {
        let c = band_constant(a, b, 0.05, 5_000, 512, 13).unwrap();
        assert!(c >= last, "c({a}, {b}) = {c} < {last}");
        last = c;
    }
}

#[test]
fn band_constant_close_to_kolmogorov_at_moderate_budget() {
    let target = kolmogorov_quantile(0.05).unwrap();
    let est = band_constant_estimate(
        0.001,
        0.999,
        0.05,
        &McParams {
            paths: 20_000,
            grid_points: 1024,
            seed: 99,
        },
    )
    .unwrap();
    assert!(
        (est.value - target).abs() < 0.05,
        "{} vs {target}",
        est.value
    );
    assert!(
        est.std_error > 0.0 && est.std_error < 0.03,
        "{}",
        est.std_error
    );
}

#[test]
fn median_matches_kolmogorov_median() {
    // a 1024-point grid under-reads the sup by roughly 0.58 / √1024
    let c = band_constant(0.001, 0.999, 0.5, 20_000, 1024, 4).unwrap();
    assert!(c < 0.8276 && 0.8276 - c < 0.035, "{c}");
}

#[test]
fn band_constant_thread_count_independent() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| band_constant(0.2, 0.7, 0.05, 3_000, 256, 8).unwrap())
    };
    assert_eq!(run(1).to_bits(), run(4).to_bits());
}

#[test]
fn band_is_deterministic() {
    let data = obs(&[
        (0.5, true),
        (1.0, false),
        (1.5, true),
        (2.0, true),
        (2.5, false),
        (3.0, true),
        (3.5, true),
        (4.0, false),
        (5.0, false),
    ]);
    let f = fit(&data).unwrap();
    let mc = McParams {
        paths: 2_000,
        grid_points: 256,
        seed: 77,
    };
    let a = confidence_band(&f, 0.5, 3.5, 0.05, &mc).unwrap();
    let b = confidence_band(&f, 0.5, 3.5, 0.05, &mc).unwrap();
    assert_eq!(a, b);
    // snapped inward: 0.4 → first knot 0.5, 3.7 → 3.5
    let c = confidence_band(&f, 0.4, 3.7, 0.05, &mc).unwrap();
    assert_eq!((c.spec.x1, c.spec.x2), (0.5, 3.5));
    assert_eq!(c.rows.len(), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ci_in_unit_interval_and_straddles(data in censored_dataset(), alpha in 0.001f64..1.0, q in 0.0f64..1.0) {
        let f = fit(&data).unwrap();
        let knots = f.knots();
        let x = knots[((knots.len() - 1) as f64 * q) as usize];
        if let Ok((lo, hi)) = ci_pointwise_log(&f, x, alpha) {
            let s = f.estimate_at(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            prop_assert!(lo <= s && s <= hi);
        } else {
            let v = f.log_variance_at_time(x).unwrap();
            prop_assert!(v.is_infinite() || f.estimate_at(x).unwrap() == 0.0);
        }
    }
}
