use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::XyzParams;
use crate::par::par_map;
use crate::specfun::{elliptic_i_from_kprime, lambda_from_sn_kprime};

/// Eight-vertex parameters behind the corner-transfer-matrix spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtmParams {
    pub gamma_p: f64,
    pub delta_p: f64,
    /// Elliptic modulus k.
    pub k: f64,
    /// k′ = √(1−k²), kept separately because k → 1 near criticality.
    pub k_prime: f64,
    /// 1 − k, also kept separately.
    pub one_minus_k: f64,
    pub lambda: f64,
    /// Anisotropy l with l² = (Jx²−Jy²)/(Jx²−Jz²).
    pub l: f64,
}

/// Couplings rotated into the principal regime |J_y^p| ≤ J_x^p ≤ −J_z^p.
///
/// Ordering the couplings by magnitude (largest L, middle m, smallest s) and fixing the
/// sign of the product (the only invariant under π-rotations of sublattices) gives
/// J_z^p = −|L|, J_x^p = |m|, J_y^p = −sign(JxJyJz)·|s|. For Jx ≥ Jy ≥ |Jz| this is
/// J_x^p = Jy, J_y^p = −Jz, J_z^p = −Jx.
pub fn principal_regime(p: &XyzParams) -> Result<CtmParams> {
    let mut mags = [p.jx.abs(), p.jy.abs(), p.jz.abs()];
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let [big, mid, small] = mags;
    if !(mid > 0.0) || !big.is_finite() {
        return Err(Error::domain(format!(
            "principal regime needs at least two nonzero couplings, got {p:?}"
        )));
    }
    if big == mid {
        return Err(Error::domain(format!(
            "critical couplings {p:?}: the two largest magnitudes coincide (k = 1)"
        )));
    }
    let sign = (p.jx * p.jy * p.jz).signum();
    let sign = if sign == 0.0 { 1.0 } else { sign };
    let jyp = -sign * small;
    let gamma_p = jyp / mid;
    let delta_p = -big / mid;
    let l = ((big - mid) * (big + mid) / ((big - small) * (big + small))).sqrt();
    ctm_from_l(gamma_p, delta_p, l)
}

/// Shared tail: with s² = (Δ²−1)/(Δ²−Γ²) one finds s = l, hence k = (1−l)/(1+l).
fn ctm_from_l(gamma_p: f64, delta_p: f64, l: f64) -> Result<CtmParams> {
    if !(gamma_p.abs() <= 1.0 && delta_p <= -1.0) {
        return Err(Error::domain(format!(
            "principal-regime conditions violated: Gamma = {gamma_p}, Delta = {delta_p}"
        )));
    }
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::domain(format!("anisotropy l = {l} outside (0, 1]")));
    }
    let one_minus_k = 2.0 * l / (1.0 + l);
    let k = (1.0 - l) / (1.0 + l);
    let k_prime = 2.0 * l.sqrt() / (1.0 + l);
    let sqrt_k = ((1.0 - l) / (1.0 + l)).sqrt();
    let ratio = ((1.0 - gamma_p) / (1.0 + gamma_p)).sqrt();
    let lambda = if sqrt_k > 0.0 && ratio.is_finite() {
        lambda_from_sn_kprime(ratio / sqrt_k, k_prime)?
    } else if k > 0.0 {
        // The target is infinite: λ sits at its upper bound I(k′).
        elliptic_i_from_kprime(k)?
    } else {
        return Err(Error::domain("lambda diverges at k = 0 with Gamma = -1"));
    };
    Ok(CtmParams { gamma_p, delta_p, k, k_prime, one_minus_k, lambda, l })
}

/// CTM parameters along the line Jx = 1, Jz = cos(β²/8), 1 − Jy² = l²(1 − Jz²).
///
/// Parametrizing by l directly keeps full precision when Jy rounds to 1 in f64.
pub fn ctm_along_critical_path(l: f64, beta2: f64) -> Result<CtmParams> {
    if !(beta2 > 0.0 && beta2 < 4.0 * PI) {
        return Err(Error::domain(format!("beta^2 = {beta2} outside (0, 4pi)")));
    }
    let jz = (beta2 / 8.0).cos();
    let one_minus_jy2 = l * l * (1.0 - jz * jz);
    let jy = (1.0 - one_minus_jy2).sqrt();
    ctm_from_l(-jz / jy, -1.0 / jy, l)
}

/// Entanglement level spacing ε = πλ/I(k).
pub fn ctm_level_spacing(c: &CtmParams) -> f64 {
    match elliptic_i_from_kprime(c.k_prime) {
        Ok(i) => PI * c.lambda / i,
        // k′ = 0 means k = 1: I diverges and the spacing closes.
        Err(_) => 0.0,
    }
}

/// Leading behaviour ε ≈ −π²(1 − β²/8π)/ln(l/4) as l → 0.
pub fn ctm_spacing_asymptotic(l: f64, beta2: f64) -> Result<f64> {
    if !(l > 0.0 && l < 4.0) {
        return Err(Error::domain(format!("asymptotic spacing needs 0 < l < 4, got {l}")));
    }
    if !(beta2 > 0.0 && beta2 < 8.0 * PI) {
        return Err(Error::domain(format!("beta^2 = {beta2} outside (0, 8pi)")));
    }
    Ok(-PI * PI * (1.0 - beta2 / (8.0 * PI)) / (l / 4.0).ln())
}

/// Small-x expansion of δ = 1 − k with x = 1 − Jy (Jx = 1, Jz = cos(β²/8)).
pub fn ctm_small_x_delta(x: f64, beta2: f64) -> f64 {
    let s = (beta2 / 8.0).sin();
    2.0 * (2.0 * x).sqrt() / s - 4.0 * x / (s * s)
}

/// Small-x expansion of λ on the same line, λ ≈ λ₀(1 + √(2x)/sin(β²/8)) with
/// λ₀ = (π/2)(1 − β²/8π).
///
/// The O(√x) term collects two pieces of equal order: the shift of the amplitude
/// argument through 1/√k, and the k′² correction of F(φ, k′) ≈ φ + k′²(φ − sinφ cosφ)/4.
pub fn ctm_small_x_lambda(x: f64, beta2: f64) -> f64 {
    let s = (beta2 / 8.0).sin();
    0.5 * PI * (1.0 - beta2 / (8.0 * PI)) * (1.0 + (2.0 * x).sqrt() / s)
}

/// ε along the critical path for a batch of anisotropies (data-parallel).
pub fn ctm_spacing_batch(ls: &[f64], beta2: f64) -> Vec<Result<f64>> {
    par_map(ls, |&l| ctm_along_critical_path(l, beta2).map(|c| ctm_level_spacing(&c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const B2: f64 = 0.063 * 8.0 * PI;

    #[test]
    fn reference_point_mapping() {
        let c = principal_regime(&XyzParams::new(1.0, 0.999_937, 0.981)).unwrap();
        assert_relative_eq!(c.gamma_p, -0.981 / 0.999_937, max_relative = 1e-14);
        assert_relative_eq!(c.delta_p, -1.0 / 0.999_937, max_relative = 1e-14);
        assert!(c.gamma_p.abs() <= 1.0 && c.delta_p <= -1.0);
    }

    #[test]
    fn free_modulus_gives_twice_lambda() {
        let c = CtmParams {
            gamma_p: 0.0,
            delta_p: -2.0,
            k: 0.0,
            k_prime: 1.0,
            one_minus_k: 1.0,
            lambda: 0.37,
            l: 1.0,
        };
        assert_relative_eq!(ctm_level_spacing(&c), 0.74, max_relative = 1e-14);
    }

    #[test]
    fn critical_limit_pushes_k_to_one() {
        let l = 0.5e-3 * (B2 / 8.0).sin() / 2.0;
        let c = ctm_along_critical_path(l, B2).unwrap();
        assert!(c.one_minus_k < 1e-3);
    }

    #[test]
    fn path_agrees_with_generic_mapping() {
        let l = 0.05;
        let jz = (B2 / 8.0).cos();
        let jy = (1.0 - l * l * (1.0 - jz * jz)).sqrt();
        let a = principal_regime(&XyzParams::new(1.0, jy, jz)).unwrap();
        let b = ctm_along_critical_path(l, B2).unwrap();
        assert_relative_eq!(a.l, b.l, max_relative = 1e-10);
        assert_relative_eq!(ctm_level_spacing(&a), ctm_level_spacing(&b), max_relative = 1e-10);
    }

    #[test]
    fn asymptotic_slope_value() {
        // slope of ε against 1/ln(l/4) is −π²(1 − β²/8π)
        let slope = -PI * PI * (1.0 - 0.063);
        assert_relative_eq!(slope, -9.247_811, max_relative = 1e-6);
        let e = ctm_spacing_asymptotic(1e-4, B2).unwrap();
        assert_relative_eq!(e, slope / (1e-4f64 / 4.0).ln(), max_relative = 1e-14);
        assert!(ctm_spacing_asymptotic(5.0, B2).is_err());
    }

    #[test]
    fn small_x_expansions() {
        // Dropped terms are relatively O(l²) = O(2x/sin²(β²/8)).
        let jz = (B2 / 8.0).cos();
        for x in [1e-6, 1e-7, 1e-8] {
            let c = principal_regime(&XyzParams::new(1.0, 1.0 - x, jz)).unwrap();
            let bound = 2.0 * c.l * c.l;
            let d = ctm_small_x_delta(x, B2);
            assert!(((d - c.one_minus_k) / c.one_minus_k).abs() < bound, "delta at x = {x}");
            let lam = ctm_small_x_lambda(x, B2);
            assert!(((lam - c.lambda) / c.lambda).abs() < bound, "lambda at x = {x}");
        }
    }
}
