//! Form-factor expansion of ⟨e^{iβφ(0)} e^{−iβφ(r)}⟩ truncated to the vacuum, one- and
//! two-particle breather states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sg::{breather_mass, vertex_vev, xi_sg};
use crate::error::{Error, Result};
use crate::models::SgParams;
use crate::par::par_map;
use crate::specfun::{bessel_k0, integrate, QuadratureSpec};

/// Which intermediate states enter the sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormFactorTerms {
    pub include_vacuum: bool,
    pub include_b1: bool,
    pub include_b2: bool,
    pub include_b1b1: bool,
    /// Upper bound on the rapidity half-width of the two-breather integral.
    pub theta_cutoff: f64,
    pub quad: QuadratureSpec,
}

impl Default for FormFactorTerms {
    fn default() -> Self {
        Self {
            include_vacuum: true,
            include_b1: true,
            include_b2: true,
            include_b1b1: true,
            theta_cutoff: 40.0,
            quad: QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-11, max_subdivisions: 4000 },
        }
    }
}

impl FormFactorTerms {
    /// Compact flag string for output tables, e.g. `"0+1+2+11"`.
    pub fn flags(&self) -> String {
        let mut v = Vec::new();
        if self.include_vacuum {
            v.push("0");
        }
        if self.include_b1 {
            v.push("1");
        }
        if self.include_b2 {
            v.push("2");
        }
        if self.include_b1b1 {
            v.push("11");
        }
        v.join("+")
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::domain(format!("xi = {xi} outside (0, 1)")));
    }
    Ok(())
}

/// Form-factor coupling λ (unrelated to the corner-transfer-matrix λ).
pub fn ff_coupling_lambda(xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let q = QuadratureSpec { abs_tol: 1e-16, rel_tol: 1e-14, max_subdivisions: 2000 };
    let top = PI * xi;
    // t/sin t has a pole at π; integrate the regular remainder after removing π/(π−t).
    let gap = PI * (1.0 - xi);
    let f = |t: f64| {
        let body = if t == 0.0 { 1.0 } else { t / t.sin() };
        body - PI / (PI - t)
    };
    let i = PI * (PI / gap).ln() + integrate(f, 0.0, top, &q)?;
    let h = 0.5 * PI * xi;
    Ok(2.0 * h.cos() * (2.0 * h.sin()).sqrt() * (-i / (2.0 * PI)).exp())
}

/// sinh(t)·sinh(tξ)·sinh(t(1+ξ))/sinh²(2t), written to stay finite for large t.
fn kernel(t: f64, xi: f64) -> f64 {
    let om = |x: f64| -(-x).exp_m1();
    0.5 * om(2.0 * t) * om(2.0 * t * xi) * om(2.0 * t * (1.0 + xi)) / (om(4.0 * t) * om(4.0 * t))
        * (-t * (2.0 - 2.0 * xi)).exp()
}

/// R(iπ(1+ξ)); the defining integral converges only for ξ < 1/2.
pub fn ff_r_shifted(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::domain(format!(
            "R(i pi (1+xi)) needs 0 < xi < 1/2 (integrand decays as exp(-t(2-4xi))), got {xi}"
        )));
    }
    let q = QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-13, max_subdivisions: 2000 };
    let f = |t: f64| {
        let om = 1.0 - (-2.0 * t * xi).exp();
        // sinh²(tξ)·kernel with the growing exponentials combined
        let s2k = 0.25 * om * om * kernel(t, xi) * (2.0 * t * xi).exp();
        (s2k + 0.5 * kernel(t, xi)) / t
    };
    Ok((8.0 * integrate(f, 0.0, f64::INFINITY, &q)?).exp())
}

/// R(θ + iπ), even in θ; needs ξ < 1.
pub fn ff_r_theta(theta: f64, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let q = QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-13, max_subdivisions: 4000 };
    let w = theta.abs() / PI;
    let f = |t: f64| {
        let s = (t * w).sin();
        kernel(t, xi) * (0.5 - s * s) / t
    };
    // Split at a few decay lengths so the oscillatory head is resolved on a finite interval.
    let t_split = 40.0 / (2.0 - 2.0 * xi);
    let head = integrate(f, 0.0, t_split, &q)?;
    let tail = integrate(f, t_split, f64::INFINITY, &q)?;
    Ok((8.0 * (head + tail)).exp())
}

/// Individual contributions, each already multiplied by 𝒢².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfBreakdown {
    pub vev_sq: f64,
    pub vacuum: f64,
    pub b1: f64,
    pub b2: f64,
    pub b1b1: f64,
}

impl FfBreakdown {
    pub fn total(&self) -> f64 {
        self.vacuum + self.b1 + self.b2 + self.b1b1
    }
}

pub fn two_point_ff_terms(r: f64, sg: &SgParams, terms: &FormFactorTerms) -> Result<FfBreakdown> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("distance must be positive, got {r}")));
    }
    if !(sg.u > 0.0 && sg.m > 0.0 && sg.a > 0.0) {
        return Err(Error::domain("two_point_ff needs u > 0, M > 0 and a > 0"));
    }
    if !(terms.theta_cutoff > 0.0) {
        return Err(Error::domain("theta_cutoff must be positive"));
    }
    let xi = xi_sg(sg.beta2)?;
    check_xi(xi)?;
    let m1 = breather_mass(1, sg.m, sg.beta2)?;
    let g = vertex_vev(sg.beta2, m1)?;
    let g2 = g * g;
    let x = r * sg.a;
    let z1 = m1 * x / sg.u;
    let lam = if terms.include_b1 || terms.include_b2 || terms.include_b1b1 {
        ff_coupling_lambda(xi)?
    } else {
        0.0
    };
    let mut out = FfBreakdown { vev_sq: g2, vacuum: 0.0, b1: 0.0, b2: 0.0, b1b1: 0.0 };
    if terms.include_vacuum {
        out.vacuum = g2;
    }
    if terms.include_b1 {
        out.b1 = g2 * lam * lam / PI * bessel_k0(z1)?;
    }
    if terms.include_b2 {
        let m2 = breather_mass(2, sg.m, sg.beta2).map_err(|_| {
            Error::domain(format!("second breather does not exist at xi = {xi}"))
        })?;
        let s2 = (2.0 * PI * xi).sin();
        if s2.abs() < 1e-8 {
            return Err(Error::domain("sin(2 pi xi) vanishes at the m2 threshold"));
        }
        let rs = ff_r_shifted(xi)?;
        let s = (PI * xi).sin();
        out.b2 = g2 * lam.powi(4) / (PI * rs * rs) * s * s / s2 * bessel_k0(m2 * x / sg.u)?;
    }
    if terms.include_b1b1 {
        let sp2 = (PI * xi).sin().powi(2);
        // K₀(y) ~ e^{−y}: stop once 2 z1 cosh(θ/2) exceeds the peak argument by ~40.
        let y_stop = 2.0 * z1 + 40.0;
        let auto = 2.0 * (y_stop / (2.0 * z1)).max(1.0).acosh();
        let big_theta = terms.theta_cutoff.min(auto);
        let mut err = None;
        let f = |th: f64| {
            let sh2 = th.sinh().powi(2);
            let r = match ff_r_theta(th, xi) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    return 0.0;
                }
            };
            let y = 2.0 * z1 * (0.5 * th).cosh();
            sh2 / (sh2 + sp2) / (r * r) * bessel_k0(y).unwrap_or(0.0)
        };
        // parity halves the range
        let half = integrate(f, 0.0, big_theta, &terms.quad)?;
        if let Some(e) = err {
            return Err(e);
        }
        out.b1b1 = g2 * lam.powi(4) / (2.0 * PI) * 2.0 * half / (2.0 * PI);
    }
    Ok(out)
}

/// Truncated form-factor sum for the vertex two-point function at distance r (lattice units).
pub fn two_point_ff(r: f64, sg: &SgParams, terms: &FormFactorTerms) -> Result<f64> {
    two_point_ff_terms(r, sg, terms).map(|b| b.total())
}

/// Evaluates [`two_point_ff`] over many distances (data-parallel).
pub fn two_point_ff_batch(rs: &[f64], sg: &SgParams, terms: &FormFactorTerms) -> Vec<Result<f64>> {
    par_map(rs, |&r| two_point_ff(r, sg, terms))
}
