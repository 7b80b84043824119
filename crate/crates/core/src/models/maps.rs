use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::{QecParams, RegimeWarning, SgParams, XyzParams};
use crate::analytics::{soliton_mass, xi_sg};
use crate::error::{Error, Result};

/// Harmonic estimates valid for E_J ≫ E_C0: u = a√(2E_C0E_J), K = √(2E_C0/E_J)/2π.
pub fn perturbative_luttinger(p: &QecParams) -> Result<(f64, f64)> {
    p.validate()?;
    if !(p.e_j > 0.0) {
        return Err(Error::domain(format!("E_J must be positive, got {}", p.e_j)));
    }
    let u = p.a * (2.0 * p.e_c0 * p.e_j).sqrt();
    let k = (2.0 * p.e_c0 / p.e_j).sqrt() / (2.0 * PI);
    Ok((u, k))
}

/// β² = πK, M0 = E_J0·a^{−(1−β²/4π)}/E_C0. The velocity comes from a fit or from
/// [`perturbative_luttinger`].
pub fn qec_to_sg(k: f64, p: &QecParams, u: f64) -> Result<SgParams> {
    p.validate()?;
    if !(k > 0.0 && k < 8.0) {
        return Err(Error::domain(format!("Luttinger parameter K = {k} outside (0, 8)")));
    }
    if !(p.e_j0 >= 0.0) {
        return Err(Error::domain("E_J0 must be non-negative"));
    }
    let beta2 = PI * k;
    let m0 = p.e_j0 * p.a.powf(-(1.0 - beta2 / (4.0 * PI))) / p.e_c0;
    SgParams::from_m0(beta2, m0, u, p.a)
}

/// Result of mapping XYZ couplings to the continuum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyzMapping {
    pub sg: SgParams,
    pub l: f64,
    pub xi_xyz: f64,
    pub warning: Option<RegimeWarning>,
}

/// K_XYZ = (2/π)arccos(Jz/Jx), β² = 4πK_XYZ, l² = (Jx²−Jy²)/(Jx²−Jz²),
/// ξ_XYZ = ¼(4/l)^{1/(1−K_XYZ/2)}, M = 1/(aξ_XYZ). Lengths are in units of the
/// spin-wave velocity, so `u` is set to 1.
pub fn xyz_to_sg(p: &XyzParams, a: f64) -> Result<XyzMapping> {
    if !(p.jx > p.jz.abs()) {
        return Err(Error::domain(format!("need Jx > |Jz|, got {p:?}")));
    }
    if !(a > 0.0) {
        return Err(Error::domain("lattice spacing must be positive"));
    }
    let l2 = (p.jx - p.jy) * (p.jx + p.jy) / ((p.jx - p.jz) * (p.jx + p.jz));
    if !(l2 > 0.0) {
        return Err(Error::domain(format!(
            "l^2 = {l2} is not positive; Jy >= Jx is gapless or outside the map"
        )));
    }
    let l = l2.sqrt();
    let k_xyz = 2.0 / PI * (p.jz / p.jx).acos();
    let beta2 = 4.0 * PI * k_xyz;
    let expo = 1.0 / (1.0 - 0.5 * k_xyz);
    let xi_xyz = 0.25 * (expo * (4.0 / l).ln()).exp();
    let sg = SgParams::from_mass(beta2, 1.0 / (a * xi_xyz), 1.0, a)?;
    Ok(XyzMapping { sg, l, xi_xyz, warning: p.regime_warning() })
}

fn sg_to_xyz_inner(beta2: f64, m_target: f64, a: f64, strict: bool) -> Result<(XyzParams, f64)> {
    xi_sg(beta2)?;
    if !(m_target > 0.0 && a > 0.0) {
        return Err(Error::domain("M and a must be positive"));
    }
    let xi_xyz = 1.0 / (a * m_target);
    if strict && xi_xyz < 1.0 {
        return Err(Error::domain(format!(
            "xi_XYZ = {xi_xyz} < 1 lattice spacing is outside the scaling limit"
        )));
    }
    let k_xyz = beta2 / (4.0 * PI);
    let jz = (0.5 * PI * k_xyz).cos();
    let l = 4.0 * (-(1.0 - 0.5 * k_xyz) * (4.0 * xi_xyz).ln()).exp();
    let jy2 = 1.0 - l * l * (1.0 - jz) * (1.0 + jz);
    if jy2 < 0.0 {
        return Err(Error::domain(format!("no real Jy for M = {m_target} (Jy^2 = {jy2})")));
    }
    Ok((XyzParams::new(1.0, jy2.sqrt(), jz), xi_xyz))
}

/// Inverse of [`xyz_to_sg`] with Jx = 1. Errors when ξ_XYZ < 1.
pub fn sg_to_xyz(beta2: f64, m_target: f64, a: f64) -> Result<XyzParams> {
    Ok(sg_to_xyz_inner(beta2, m_target, a, true)?.0)
}

/// Like [`sg_to_xyz`] but accepts ξ_XYZ < 1 as long as Jy stays real, returning a
/// warning instead. Used by mass scans that deliberately leave the scaling limit.
pub fn sg_to_xyz_relaxed(
    beta2: f64,
    m_target: f64,
    a: f64,
) -> Result<(XyzParams, Option<RegimeWarning>)> {
    let (p, xi_xyz) = sg_to_xyz_inner(beta2, m_target, a, false)?;
    let warn = p.regime_warning().or_else(|| {
        (xi_xyz < 1.0).then(|| RegimeWarning {
            jx: p.jx,
            jy: p.jy,
            jz: p.jz,
            message: format!("xi_XYZ = {xi_xyz:.4} < 1: outside the scaling limit"),
        })
    });
    Ok((p, warn))
}

/// Soliton mass from the lattice VEV ⟨σ⟩ of the vertex operator e^{iβφ/2}:
/// M = (4/a)·[2(1−β²/8π)σ]^{16π/β²}, in log space.
pub fn soliton_mass_from_sigma(sigma_vev: f64, beta2: f64, a: f64) -> Result<f64> {
    xi_sg(beta2)?;
    if !(sigma_vev > 0.0) || !(a > 0.0) {
        return Err(Error::domain(format!("need sigma > 0 and a > 0, got {sigma_vev}, {a}")));
    }
    let base = 2.0 * (1.0 - beta2 / (8.0 * PI)) * sigma_vev;
    let ln_m = (4.0 / a).ln() + 16.0 * PI / beta2 * base.ln();
    if ln_m > 700.0 {
        return Err(Error::Numerical(format!("soliton mass overflows (ln M = {ln_m})")));
    }
    Ok(ln_m.exp())
}

/// Inverts the M(M0) relation using its homogeneity M ∝ M0^{1/(2−β²/4π)}.
pub fn m0_from_soliton_mass(beta2: f64, m: f64) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("soliton mass must be finite and >= 0, got {m}")));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let m_unit = soliton_mass(beta2, 1.0)?;
    Ok(((2.0 - beta2 / (4.0 * PI)) * (m / m_unit).ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn perturbative_values() {
        let p = QecParams { e_j: 1.55, ..Default::default() };
        let (u, k) = perturbative_luttinger(&p).unwrap();
        assert_relative_eq!(u, 1.760681686165901, epsilon = 1e-12);
        assert_relative_eq!(k, 0.18078786681592018, epsilon = 1e-14);
        let p = QecParams { e_j: 2.0, ..Default::default() };
        assert_relative_eq!(perturbative_luttinger(&p).unwrap().1, 1.0 / (2.0 * PI), epsilon = 1e-15);
        let p3 = QecParams { e_j: 1.55, a: 3.0, ..Default::default() };
        let (u3, k3) = perturbative_luttinger(&p3).unwrap();
        assert_relative_eq!(u3, 3.0 * u, epsilon = 1e-12);
        assert_relative_eq!(k3, k, epsilon = 1e-15);
        assert!(perturbative_luttinger(&QecParams { e_j: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn qec_coupling_conventions() {
        let p = QecParams { e_j0: 0.016, ..Default::default() };
        let sg = qec_to_sg(4.0, &p, 1.0).unwrap();
        assert_relative_eq!(sg.beta2_over_8pi(), 0.5, epsilon = 1e-15);
        let sg = qec_to_sg(0.504, &p, 1.0).unwrap();
        assert_relative_eq!(sg.beta2_over_8pi(), 0.063, epsilon = 1e-15);
        assert_relative_eq!(sg.m0, 0.016, epsilon = 1e-15);
        assert_relative_eq!(sg.m, 0.659669940230632, max_relative = 1e-10);
        assert!(qec_to_sg(8.0, &p, 1.0).is_err());
    }

    #[test]
    fn xyz_reference_point() {
        let m = xyz_to_sg(&XyzParams::new(1.0, 0.999937, 0.981), 1.0).unwrap();
        assert!(m.warning.is_none());
        // Jz = 0.981 is a rounded figure: cos(π·0.126/2) = 0.98048, so β²/8π lands at 0.0621.
        assert_relative_eq!(m.sg.beta2_over_8pi(), 0.0630, epsilon = 1e-3);
        assert_relative_eq!(m.l, 0.0579, epsilon = 2e-4);
        assert_relative_eq!(m.xi_xyz, 23.0, epsilon = 0.2);
        assert_relative_eq!(m.sg.m, 0.0435, epsilon = 5e-4);
        let free = xyz_to_sg(&XyzParams::new(1.0, 0.5, 0.0), 1.0).unwrap();
        assert_relative_eq!(free.sg.beta2_over_8pi(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn conventions_agree_when_k_is_four_k_xyz() {
        let p = XyzParams::new(1.0, 0.9, 0.4);
        let m = xyz_to_sg(&p, 1.0).unwrap();
        let k_xyz = m.sg.beta2 / (4.0 * PI);
        let q = qec_to_sg(4.0 * k_xyz, &QecParams::default(), 1.0).unwrap();
        assert_relative_eq!(q.beta2_over_8pi(), m.sg.beta2_over_8pi(), epsilon = 1e-14);
    }

    #[test]
    fn sg_to_xyz_examples() {
        let p = sg_to_xyz(0.063 * 8.0 * PI, 0.0435, 1.0).unwrap();
        assert_eq!(p.jx, 1.0);
        assert_relative_eq!(p.jy, 0.999937, epsilon = 2e-6);
        assert_relative_eq!(p.jz, 0.981, epsilon = 1e-3);
        assert_eq!(sg_to_xyz(4.0 * PI, 0.1, 1.0).unwrap().jz.abs() < 1e-15, true);
        assert!(sg_to_xyz(0.063 * 8.0 * PI, 2.0, 1.0).is_err());
        let (_, w) = sg_to_xyz_relaxed(0.063 * 8.0 * PI, 1.2, 1.0).unwrap();
        assert!(w.is_some());
    }

    #[test]
    fn sigma_inversion() {
        let b2 = 0.054 * 8.0 * PI;
        let m = 0.03;
        let sigma = (m / 4.0_f64).powf(b2 / (16.0 * PI)) / (2.0 * (1.0 - b2 / (8.0 * PI)));
        assert_relative_eq!(soliton_mass_from_sigma(sigma, b2, 1.0).unwrap(), m, max_relative = 1e-12);
        let lo = soliton_mass_from_sigma(0.8 * sigma, b2, 1.0).unwrap();
        assert!(lo < m);
    }

    #[test]
    fn m0_inverse() {
        let b2 = 0.3 * 8.0 * PI;
        let m = soliton_mass(b2, 0.02).unwrap();
        assert_relative_eq!(m0_from_soliton_mass(b2, m).unwrap(), 0.02, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        // Jy is stored as √(1−l²(1−Jz²)), so 1−Jy² carries a relative error of order
        // 1e-16/(1−Jy²); the 1e-10 round trip needs 1−Jy² above ~1e-5.
        fn xyz_round_trip(b8 in 0.02f64..0.48, m in 1e-3f64..0.5) {
            let beta2 = b8 * 8.0 * PI;
            if let Ok(p) = sg_to_xyz(beta2, m, 1.0) {
                prop_assume!(1.0 - p.jy * p.jy > 1e-5);
                let back = xyz_to_sg(&p, 1.0).unwrap();
                prop_assert!((back.sg.beta2 - beta2).abs() <= 1e-10 * beta2);
                prop_assert!((back.sg.m - m).abs() <= 1e-10 * m);
            }
        }

        #[test]
        fn sigma_map_is_increasing(s in 0.3f64..0.6, ds in 1e-3f64..0.1) {
            let b2 = 0.1 * 8.0 * PI;
            let a = soliton_mass_from_sigma(s, b2, 1.0).unwrap();
            let b = soliton_mass_from_sigma(s + ds, b2, 1.0).unwrap();
            prop_assert!(b > a);
        }
    }
}
