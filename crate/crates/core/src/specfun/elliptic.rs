//! Elliptic integrals in the modulus convention: I(k) = ∫₀^{π/2} dt / √(1 − k² sin² t).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Carlson's symmetric R_F by duplication.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    for _ in 0..200 {
        let mu = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mu, 1.0 - y / mu, 1.0 - z / mu);
        let eps = dx.abs().max(dy.abs()).max(dz.abs());
        if eps < 1e-4 {
            // Fifth-order Taylor tail; truncation error ~ eps^6.
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    let mu = (x + y + z) / 3.0;
    1.0 / mu.sqrt()
}

/// Complete integral I(k) for 0 ≤ k < 1.
pub fn elliptic_i(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::domain(format!("elliptic_i needs 0 <= k < 1, got {k}")));
    }
    elliptic_i_from_kprime(((1.0 - k) * (1.0 + k)).sqrt())
}

/// I(k) given the complementary modulus k′ = √(1−k²), accurate when k is close to 1.
pub fn elliptic_i_from_kprime(kp: f64) -> Result<f64> {
    if !(kp > 0.0 && kp <= 1.0) {
        return Err(Error::domain(format!("complementary modulus must lie in (0,1], got {kp}")));
    }
    Ok(FRAC_PI_2 / agm(1.0, kp))
}

fn f_unchecked(phi: f64, k: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0)
}

/// Incomplete integral F(φ, k) for φ ∈ [0, π/2], 0 ≤ k < 1.
pub fn elliptic_f(phi: f64, k: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 + 1e-15).contains(&phi) {
        return Err(Error::domain(format!("elliptic_f needs phi in [0, pi/2], got {phi}")));
    }
    if !(0.0..1.0).contains(&k) {
        return Err(Error::domain(format!("elliptic_f needs 0 <= k < 1, got {k}")));
    }
    if phi >= FRAC_PI_2 {
        return elliptic_i(k);
    }
    Ok(f_unchecked(phi, k))
}

/// λ ≥ 0 with −i·sn(iλ, k) = target, using −i·sn(iλ,k) = sn(λ,k′)/cn(λ,k′).
pub fn lambda_from_sn(target: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::domain(format!("lambda_from_sn needs 0 <= k < 1, got {k}")));
    }
    lambda_from_sn_kprime(target, ((1.0 - k) * (1.0 + k)).sqrt())
}

/// Same as [`lambda_from_sn`] but parametrized by k′ directly (k′ = 1 is allowed: k = 0).
pub fn lambda_from_sn_kprime(target: f64, kp: f64) -> Result<f64> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::domain(format!("lambda_from_sn needs a finite target >= 0, got {target}")));
    }
    if !(0.0..=1.0).contains(&kp) {
        return Err(Error::domain(format!("complementary modulus {kp} outside [0,1]")));
    }
    Ok(f_unchecked(target.atan(), kp))
}

/// Jacobi sn, cn, dn at real argument `u` with modulus k ≤ 1 (descending Landen/AGM).
pub fn jacobi_sn_cn_dn(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::domain(format!("jacobi modulus {k} outside [0,1]")));
    }
    if k == 1.0 {
        let s = u.tanh();
        let c = 1.0 / u.cosh();
        return Ok((s, c, c));
    }
    if k < 1e-300 {
        let (s, c) = u.sin_cos();
        return Ok((s, c, 1.0));
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 64 {
        let an = 0.5 * (a.last().unwrap() + b);
        let cn = 0.5 * (a.last().unwrap() - b);
        b = (a.last().unwrap() * b).sqrt();
        a.push(an);
        c.push(cn);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (s, cc) = phi.sin_cos();
    Ok((s, cc, (1.0 - k * k * s * s).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn complete_integral() {
        assert_relative_eq!(elliptic_i(0.0).unwrap(), PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(elliptic_i(0.5).unwrap(), 1.685_750_354_812_596, max_relative = 1e-13);
        let k = 1.0 - 1e-6;
        let lim = elliptic_i(k).unwrap() + 0.5 * ((1.0 - k) / 8.0).ln();
        assert!(lim.abs() < 1e-4, "{lim}");
        assert!(elliptic_i(1.0).is_err());
    }

    #[test]
    fn incomplete_integral() {
        assert_relative_eq!(elliptic_f(0.7, 0.0).unwrap(), 0.7, max_relative = 1e-14);
        for &k in &[0.0, 0.3, 0.9, 0.999] {
            assert_relative_eq!(
                elliptic_f(PI / 2.0 - 1e-12, k).unwrap(),
                elliptic_i(k).unwrap(),
                max_relative = 1e-9
            );
            assert_relative_eq!(elliptic_f(PI / 2.0, k).unwrap(), elliptic_i(k).unwrap(), max_relative = 1e-12);
        }
        // reference by high-precision quadrature
        assert_relative_eq!(elliptic_f(FRAC_PI_4, 0.9).unwrap(), 0.857_940_197_885_5, max_relative = 1e-12);
    }

    #[test]
    fn lambda_inversion() {
        assert_relative_eq!(lambda_from_sn(0.3f64.sinh(), 0.0).unwrap(), 0.3, max_relative = 1e-13);
        let l = lambda_from_sn(0.5f64.tan(), 1.0 - 1e-10).unwrap();
        assert!((l - 0.5).abs() < 1e-4);
        let (target, k) = (0.7, 0.6);
        let lam = lambda_from_sn(target, k).unwrap();
        let kp = (1.0 - k * k as f64).sqrt();
        let (s, c, _) = jacobi_sn_cn_dn(lam, kp).unwrap();
        assert!((s / c - target).abs() < 1e-10);
    }

    #[test]
    fn jacobi_limits() {
        let (s, c, d) = jacobi_sn_cn_dn(0.4, 0.0).unwrap();
        assert_relative_eq!(s, 0.4f64.sin(), max_relative = 1e-14);
        assert_relative_eq!(c, 0.4f64.cos(), max_relative = 1e-14);
        assert_eq!(d, 1.0);
        // sn(F(φ,k),k) = sin φ
        let (phi, k) = (1.1, 0.8);
        let (s, c, _) = jacobi_sn_cn_dn(elliptic_f(phi, k).unwrap(), k).unwrap();
        assert_relative_eq!(s, phi.sin(), max_relative = 1e-13);
        assert_relative_eq!(c, phi.cos(), max_relative = 1e-12);
    }
}
