use proptest::prelude::*;
use qsg_harness::fit::{fit_cardy, fit_central_charge, fit_linear, middle_window};

proptest! {
    #[test]
    fn exact_lines_are_recovered(
        slope in -50.0f64..50.0,
        intercept in -50.0f64..50.0,
        xs in proptest::collection::vec(-100.0f64..100.0, 3..40),
    ) {
        prop_assume!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-3);
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();
        let f = fit_linear(&xs, &ys, None).unwrap();
        let scale = 1.0 + slope.abs() + intercept.abs();
        prop_assert!((f.slope - slope).abs() < 1e-10 * scale);
        prop_assert!((f.intercept - intercept).abs() < 1e-10 * scale * 100.0);
        prop_assert!(f.residual_rms < 1e-10 * scale * 100.0);
    }

    #[test]
    fn covariance_is_symmetric_psd(
        ys in proptest::collection::vec(-10.0f64..10.0, 4..30),
    ) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.7 - 3.0).collect();
        let f = fit_linear(&xs, &ys, None).unwrap();
        let c = f.covariance;
        prop_assert_eq!(c[0][1], c[1][0]);
        prop_assert!(c[0][0] >= 0.0 && c[1][1] >= 0.0);
        prop_assert!(c[0][0] * c[1][1] - c[0][1] * c[1][0] >= -1e-12 * (c[0][0] * c[1][1]).abs());
    }

    #[test]
    fn cardy_form_is_recovered(
        e0 in -3.0f64..0.0,
        u in 0.2f64..3.0,
        b in -1.0f64..1.0,
        c in 0.5f64..2.0,
        start in 4usize..16,
        n in 4usize..8,
    ) {
        let ls: Vec<usize> = (0..n).map(|i| start + 4 * i).collect();
        let es: Vec<f64> = ls.iter().map(|&l| {
            let l = l as f64;
            e0 * l + b - std::f64::consts::PI * c * u / (24.0 * l)
        }).collect();
        let f = fit_cardy(&ls, &es, c).unwrap();
        prop_assert!((f.e0 - e0).abs() < 1e-10);
        prop_assert!((f.u - u).abs() < 1e-10 * (1.0 + ls[n - 1] as f64).powi(2));
        prop_assert!((f.b - b).abs() < 1e-10 * ls[n - 1] as f64);
    }

    #[test]
    fn central_charge_is_recovered(
        c in 0.3f64..3.0,
        s0 in -1.0f64..1.0,
        xis in proptest::collection::vec(1.5f64..500.0, 4..10),
    ) {
        let mut xis = xis;
        xis.sort_by(f64::total_cmp);
        xis.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-3);
        prop_assume!(xis.len() >= 4);
        let s: Vec<f64> = xis.iter().map(|x| c / 6.0 * x.ln() + s0).collect();
        let f = fit_central_charge(&s, &xis).unwrap();
        prop_assert!((f.c - c).abs() < 1e-10);
        prop_assert!(!f.non_monotone);
    }
}

#[test]
fn middle_window_drops_two_at_each_end() {
    assert_eq!(middle_window(9), 2..7);
    assert_eq!(middle_window(7), 2..5);
    assert_eq!(middle_window(5), 0..5);
}

#[test]
fn fits_reject_bad_input() {
    assert!(fit_linear(&[1.0, 2.0], &[1.0, 2.0], None).is_err());
    assert!(fit_linear(&[1.0, 2.0, 3.0], &[1.0, 2.0], None).is_err());
    assert!(fit_linear(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0], None).is_err());
    assert!(fit_linear(&[1.0, 2.0, f64::NAN], &[1.0, 2.0, 3.0], None).is_err());
    assert!(fit_cardy(&[8, 8, 8, 8], &[1.0, 1.0, 1.0, 1.0], 1.0).is_err());
    assert!(fit_cardy(&[8, 12, 16], &[1.0, 1.0, 1.0], 1.0).is_err());
    let f = fit_central_charge(&[1.0, 1.1, 1.2, 1.3], &[10.0, 12.0, 11.0, 14.0]).unwrap();
    assert!(f.non_monotone);
}
