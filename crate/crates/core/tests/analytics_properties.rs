use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qsg_core::analytics::{
    breather_mass, ctm_along_critical_path, ctm_level_spacing, soliton_mass, two_point_ff_terms,
    vertex_vev, FormFactorTerms,
};
use qsg_core::models::SgParams;
use qsg_core::specfun::{
    bessel_k0, elliptic_f, elliptic_i, elliptic_i_from_kprime, jacobi_sn_cn_dn, EULER_GAMMA,
};

fn cheap_terms() -> FormFactorTerms {
    let mut t = FormFactorTerms::default();
    t.quad.rel_tol = 1e-9;
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soliton_mass_is_homogeneous(b in 0.01f64..0.95, m0 in 1e-6f64..1.0, lam in 0.1f64..10.0) {
        let beta2 = 8.0 * PI * b;
        let p = 1.0 / (2.0 - beta2 / (4.0 * PI));
        let lhs = soliton_mass(beta2, lam * m0).unwrap();
        let rhs = lam.powf(p) * soliton_mass(beta2, m0).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_vev_scales_with_dimension(b in 0.01f64..0.45, m1 in 1e-4f64..2.0, lam in 0.1f64..10.0) {
        let beta2 = 8.0 * PI * b;
        let lhs = vertex_vev(beta2, lam * m1).unwrap();
        let rhs = lam.powf(beta2 / (4.0 * PI)) * vertex_vev(beta2, m1).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breathers_are_ordered_below_threshold(b in 0.01f64..0.33, m in 0.01f64..2.0) {
        let beta2 = 8.0 * PI * b;
        let m1 = breather_mass(1, m, beta2).unwrap();
        let m2 = breather_mass(2, m, beta2).unwrap();
        prop_assert!(0.0 < m1 && m1 < m2 && m2 < 2.0 * m);
    }

    #[test]
    fn elliptic_round_trip(phi in 0.0f64..1.5, k in 0.0f64..0.999) {
        let u = elliptic_f(phi, k).unwrap();
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, k).unwrap();
        prop_assert!((sn - phi.sin()).abs() < 1e-12);
        prop_assert!((cn - phi.cos()).abs() < 1e-12);
        prop_assert!((dn * dn - (1.0 - k * k * sn * sn)).abs() < 1e-12);
    }

    #[test]
    fn complete_integral_bounds_incomplete(phi in 0.0f64..FRAC_PI_2, k in 0.0f64..0.999) {
        let f = elliptic_f(phi, k).unwrap();
        let i = elliptic_i(k).unwrap();
        prop_assert!(f <= i * (1.0 + 1e-14) && f >= phi * (1.0 - 1e-14));
    }

    #[test]
    fn bessel_k0_is_decreasing_and_convex(x in 0.01f64..50.0) {
        let h = 1e-3 * x;
        let (a, b, c) = (bessel_k0(x - h).unwrap(), bessel_k0(x).unwrap(), bessel_k0(x + h).unwrap());
        prop_assert!(a > b && b > c);
        prop_assert!(a + c - 2.0 * b >= -1e-14 * b);
    }

    #[test]
    fn ctm_spacing_grows_with_anisotropy(b in 0.02f64..0.49, e1 in -12.0f64..-1.0, de in 0.1f64..2.0) {
        let beta2 = 8.0 * PI * b;
        let l1 = 10f64.powf(e1);
        let l2 = 10f64.powf(e1 - de);
        let s1 = ctm_level_spacing(&ctm_along_critical_path(l1, beta2).unwrap());
        let s2 = ctm_level_spacing(&ctm_along_critical_path(l2, beta2).unwrap());
        prop_assert!(s1 > s2 && s2 > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The normalized correlator decreases monotonically to 1 (clustering).
    #[test]
    fn form_factor_clusters_monotonically(b in 0.03f64..0.3, m in 0.2f64..1.5, u in 0.5f64..2.0) {
        let sg = SgParams::from_mass(8.0 * PI * b, m, u, 1.0).unwrap();
        let t = cheap_terms();
        let m1 = breather_mass(1, m, sg.beta2).unwrap();
        let mut prev = f64::INFINITY;
        for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let c = two_point_ff_terms(r * u / m1, &sg, &t).unwrap();
            let n = c.total() / c.vev_sq;
            prop_assert!(n > 1.0 && n < prev);
            prev = n;
        }
        let far = two_point_ff_terms(60.0 * u / m1, &sg, &t).unwrap();
        prop_assert!((far.total() / far.vev_sq - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bessel_limits() {
    for x in [1e-8, 1e-6, 1e-4] {
        let small = -(x / 2.0f64).ln() - EULER_GAMMA;
        assert!((bessel_k0(x).unwrap() / small - 1.0).abs() < 1e-6);
    }
    for x in [60.0, 120.0, 300.0, 700.0] {
        let s = 1.0 / (8.0 * x);
        let asym = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 - s + 4.5 * s * s - 37.5 * s.powi(3) + 459.375 * s.powi(4));
        assert!((bessel_k0(x).unwrap() / asym - 1.0).abs() < 1e-9);
    }
}

#[test]
fn elliptic_limits() {
    assert!((elliptic_i(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    // I(k) ≈ ln(4/k′) as k → 1
    let kp: f64 = 1e-6;
    assert!((elliptic_i_from_kprime(kp).unwrap() - (4.0 / kp).ln()).abs() < 1e-9);
}
