//! Least-squares fits behind the scaling analyses.

use std::ops::Range;

use faer::Mat;
use faer::linalg::solvers::SolveLstsqCore;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use qsg_core::mps::EntanglementSpectrum;

/// Straight-line fit y = slope·x + intercept over `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Covariance of (slope, intercept) from the residual variance.
    pub covariance: [[f64; 2]; 2],
    pub residual_rms: f64,
    /// Index range of the input points used.
    pub window: Range<usize>,
}

impl FitResult {
    pub fn slope_err(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn intercept_err(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Drops the two smallest and two largest points when at least seven are available.
pub fn middle_window(n: usize) -> Range<usize> {
    if n >= 7 { 2..n - 2 } else { 0..n }
}

/// Ordinary least squares on `xs[window]`, `ys[window]` (all points if `None`).
pub fn fit_linear(xs: &[f64], ys: &[f64], window: Option<Range<usize>>) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(HarnessError::Fit(format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    let w = window.unwrap_or(0..xs.len());
    if w.end > xs.len() || w.len() < 3 {
        return Err(HarnessError::Fit(format!("window {w:?} needs at least 3 of {} points", xs.len())));
    }
    let (x, y) = (&xs[w.clone()], &ys[w.clone()]);
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(HarnessError::Fit("non-finite data in fit window".into()));
    }
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if sxx <= (1e-12 * scale).powi(2) * n {
        return Err(HarnessError::Fit("degenerate x range".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let sigma2 = if x.len() > 2 { ss / (n - 2.0) } else { 0.0 };
    let var_slope = sigma2 / sxx;
    let cov = [[var_slope, -xm * var_slope], [-xm * var_slope, sigma2 / n + xm * xm * var_slope]];
    Ok(FitResult { slope, intercept, covariance: cov, residual_rms: (ss / n).sqrt(), window: w })
}

/// E(L) = E0·L + b − π c u /(24 L) fitted for (E0, u, b) at fixed c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardyFit {
    pub e0: f64,
    pub u: f64,
    pub b: f64,
    pub c: f64,
    pub residual_rms: f64,
}

pub fn fit_cardy(lengths: &[usize], energies: &[f64], c: f64) -> Result<CardyFit> {
    if lengths.len() != energies.len() || lengths.len() < 4 {
        return Err(HarnessError::Fit("Cardy fit needs at least four (L, E) pairs".into()));
    }
    if !(c > 0.0) {
        return Err(HarnessError::Fit("central charge must be positive".into()));
    }
    let n = lengths.len();
    let a = Mat::<f64>::from_fn(n, 3, |i, j| {
        let l = lengths[i] as f64;
        [l, 1.0, -std::f64::consts::PI * c / (24.0 * l)][j]
    });
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| energies[i]);
    let qr = a.qr();
    // Conditioning guard: the R factor's diagonal must not collapse.
    let r = qr.R();
    let rmax = (0..3).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rmin = (0..3).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(rmin > 1e-12 * rmax) {
        return Err(HarnessError::Fit("ill-conditioned Cardy design matrix".into()));
    }
    qr.solve_lstsq_in_place_with_conj(faer::Conj::No, rhs.as_mut());
    let (e0, b, u) = (rhs[(0, 0)], rhs[(1, 0)], rhs[(2, 0)]);
    let ss: f64 = lengths
        .iter()
        .zip(energies)
        .map(|(&l, e)| {
            let l = l as f64;
            (e - (e0 * l + b - std::f64::consts::PI * c * u / (24.0 * l))).powi(2)
        })
        .sum();
    Ok(CardyFit { e0, u, b, c, residual_rms: (ss / n as f64).sqrt() })
}

/// Central charge from S = (c/6) ln ξ + const.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralChargeFit {
    pub c: f64,
    pub c_err: f64,
    pub fit: FitResult,
    /// ξ failed to increase along the scan; the fit is still reported.
    pub non_monotone: bool,
}

pub fn fit_central_charge(entropies: &[f64], xis: &[f64]) -> Result<CentralChargeFit> {
    if entropies.len() < 4 {
        return Err(HarnessError::Fit("central charge fit needs at least four points".into()));
    }
    if xis.iter().any(|&x| !(x > 0.0)) {
        return Err(HarnessError::Fit("correlation lengths must be positive".into()));
    }
    let lx: Vec<f64> = xis.iter().map(|x| x.ln()).collect();
    let fit = fit_linear(&lx, entropies, None)?;
    let non_monotone = xis.windows(2).any(|w| w[1] <= w[0]);
    Ok(CentralChargeFit { c: 6.0 * fit.slope, c_err: 6.0 * fit.slope_err(), fit, non_monotone })
}

/// Level spacing from the first three clusters of an entanglement spectrum.
pub fn extract_es_spacing(spec: &EntanglementSpectrum) -> Result<f64> {
    if spec.cluster_means.len() < 3 {
        return Err(HarnessError::Fit(format!(
            "only {} level clusters resolved, need 3",
            spec.cluster_means.len()
        )));
    }
    let idx = [0.0, 1.0, 2.0];
    Ok(fit_linear(&idx, &spec.cluster_means[..3], None)?.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = fit_linear(&xs, &ys, None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(f.residual_rms < 1e-12);
        assert!(fit_linear(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0], None).is_err());
    }

    #[test]
    fn cardy_inverse_crime() {
        let ls = [8usize, 12, 16, 24, 32, 48];
        let es: Vec<f64> = ls
            .iter()
            .map(|&l| {
                let l = l as f64;
                -1.3 * l + 0.2 - std::f64::consts::PI * 1.46 / (24.0 * l)
            })
            .collect();
        let f = fit_cardy(&ls, &es, 1.0).unwrap();
        assert!((f.e0 + 1.3).abs() < 1e-10 && (f.u - 1.46).abs() < 1e-10 && (f.b - 0.2).abs() < 1e-10);
    }

    #[test]
    fn central_charge_inverse_crime() {
        let xis = [3.0, 5.0, 9.0, 17.0, 30.0];
        let s: Vec<f64> = xis.iter().map(|x: &f64| x.ln() / 6.0 + 0.7).collect();
        let f = fit_central_charge(&s, &xis).unwrap();
        assert!((f.c - 1.0).abs() < 1e-10);
        assert!(!f.non_monotone);
    }

    #[test]
    fn es_ladder_spacing() {
        let w = [0.0, 0.8, 1.6, 1.6, 2.4];
        let s: Vec<f64> = w.iter().map(|x: &f64| (-x / 2.0).exp()).collect();
        let es = EntanglementSpectrum::from_schmidt(&s);
        assert!((extract_es_spacing(&es).unwrap() - 0.8).abs() < 1e-12);
        assert!(extract_es_spacing(&EntanglementSpectrum::from_schmidt(&[1.0])).is_err());
    }
}
