use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{gamma_fn, ln_gamma};

fn check_beta2(beta2: f64) -> Result<()> {
    if !(beta2 > 0.0 && beta2 < 8.0 * PI) {
        return Err(Error::domain(format!("beta^2 = {beta2} outside (0, 8pi)")));
    }
    Ok(())
}

/// Renormalized coupling ξ = β²/(8π − β²).
pub fn xi_sg(beta2: f64) -> Result<f64> {
    check_beta2(beta2)?;
    Ok(beta2 / (8.0 * PI - beta2))
}

/// Soliton mass as a function of the action's mass parameter M0, evaluated in log space.
pub fn soliton_mass(beta2: f64, m0: f64) -> Result<f64> {
    let xi = xi_sg(beta2)?;
    if !(m0 >= 0.0) || !m0.is_finite() {
        return Err(Error::domain(format!("M0 must be finite and >= 0, got {m0}")));
    }
    if m0 == 0.0 {
        return Ok(0.0);
    }
    let b = beta2 / (8.0 * PI);
    let ln_pre = 2f64.ln() + ln_gamma(0.5 * xi)? - 0.5 * PI.ln() - ln_gamma(0.5 * (1.0 + xi))?;
    let ln_inner = m0.ln() + PI.ln() + ln_gamma(1.0 - b)? - 2f64.ln() - ln_gamma(b)?;
    let expo = 1.0 / (2.0 - beta2 / (4.0 * PI));
    Ok((ln_pre + expo * ln_inner).exp())
}

/// Mass of the n-th breather, defined for 1 ≤ n ≤ ⌊1/ξ⌋.
pub fn breather_mass(n: u32, m: f64, beta2: f64) -> Result<f64> {
    let xi = xi_sg(beta2)?;
    let n_max = (1.0 / xi + 1e-12).floor();
    if n == 0 || n as f64 > n_max {
        return Err(Error::domain(format!(
            "breather {n} does not exist at xi = {xi} (at most {n_max})"
        )));
    }
    Ok(2.0 * m * (0.5 * n as f64 * PI * xi).sin())
}

/// Ground-state energy density relative to the free compact boson, E₀ = −(M²/4)·tan(πξ/2).
pub fn vacuum_energy_density(m: f64, beta2: f64) -> Result<f64> {
    let xi = xi_sg(beta2)?;
    if xi >= 1.0 {
        return Err(Error::domain(
            "vacuum energy density diverges at and beyond the free-fermion point (xi >= 1)",
        ));
    }
    Ok(-0.25 * m * m * (0.5 * PI * xi).tan())
}

/// VEV of e^{iβφ} in the standard CFT normalization, in terms of the lightest breather mass.
pub fn vertex_vev(beta2: f64, m1: f64) -> Result<f64> {
    let xi = xi_sg(beta2)?;
    if !(m1 > 0.0) {
        return Err(Error::domain(format!("m1 must be positive, got {m1}")));
    }
    let s = (PI * xi).sin();
    if s.abs() < 1e-12 {
        return Err(Error::domain("sin(pi xi) vanishes: vertex VEV has a pole"));
    }
    let b = beta2 / (8.0 * PI);
    let pre = (1.0 + xi) * PI * gamma_fn(1.0 - b)? / (16.0 * s * gamma_fn(b)?);
    let bracket = gamma_fn(0.5 * (1.0 + xi))? * gamma_fn(1.0 - 0.5 * xi)? / (4.0 * PI.sqrt());
    let p = beta2 / (4.0 * PI);
    Ok(pre * bracket.powf(p - 2.0) * m1.powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const B2: f64 = 0.063 * 8.0 * PI;

    #[test]
    fn xi_values() {
        assert_relative_eq!(xi_sg(4.0 * PI).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(xi_sg(B2).unwrap(), 0.067_235_859_124_866, max_relative = 1e-12);
        let tiny = 1e-9 * 8.0 * PI;
        assert_relative_eq!(xi_sg(tiny).unwrap(), 1e-9, max_relative = 1e-8);
        assert!(xi_sg(0.0).is_err() && xi_sg(8.0 * PI).is_err());
    }

    #[test]
    fn soliton_mass_oracle_and_free_fermion() {
        // independent high-precision evaluation
        assert_relative_eq!(soliton_mass(B2, 0.016).unwrap(), 0.659_669_940, max_relative = 1e-8);
        assert_relative_eq!(soliton_mass(4.0 * PI, 0.37).unwrap(), PI * 0.37, max_relative = 1e-12);
        let (m1, m10) = (soliton_mass(B2, 0.02).unwrap(), soliton_mass(B2, 0.2).unwrap());
        let expo = 1.0 / (2.0 - B2 / (4.0 * PI));
        assert_relative_eq!(m10, 10f64.powf(expo) * m1, max_relative = 1e-12);
        assert_eq!(soliton_mass(B2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn breathers() {
        assert_relative_eq!(breather_mass(1, 0.4, 4.0 * PI).unwrap(), 0.8, max_relative = 1e-12);
        assert!(breather_mass(2, 0.4, 4.0 * PI).is_err());
        assert!(breather_mass(0, 0.4, B2).is_err());
        let m1 = breather_mass(1, 0.662, B2).unwrap();
        let m2 = breather_mass(2, 0.662, B2).unwrap();
        assert_relative_eq!(m1, 0.139_572_914_182, max_relative = 1e-10);
        assert_relative_eq!(m2, 0.277_590_439_114, max_relative = 1e-10);
        let xi = xi_sg(B2).unwrap();
        assert_relative_eq!(m2 / m1, 2.0 * (0.5 * PI * xi).cos(), max_relative = 1e-12);
        let nmax = (1.0 / xi).floor() as u32;
        assert!(breather_mass(nmax, 1.0, B2).unwrap() < 2.0);
        assert!(breather_mass(nmax + 1, 1.0, B2).is_err());
    }

    #[test]
    fn vacuum_energy() {
        assert_eq!(vacuum_energy_density(0.0, B2).unwrap(), 0.0);
        assert_relative_eq!(vacuum_energy_density(0.662, B2).unwrap(), -0.011_614_373_467, max_relative = 1e-9);
        assert!(vacuum_energy_density(0.5, 4.0 * PI).is_err());
    }

    #[test]
    fn vev_limits_and_scaling() {
        let g = vertex_vev(1e-9, 0.3).unwrap();
        assert!((g - 1.0).abs() < 1e-6, "{g}");
        let a = vertex_vev(B2, 0.1396).unwrap();
        let b = vertex_vev(B2, 3.0 * 0.1396).unwrap();
        assert_relative_eq!(b, 3f64.powf(B2 / (4.0 * PI)) * a, max_relative = 1e-12);
    }
}
