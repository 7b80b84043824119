use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let s = Self { abs_tol, rel_tol, max_subdivisions };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        Ok(())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_635,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

fn gk21(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Maps [a, ∞) onto [0, 1) via x = a + t/(1−t).
fn semi_infinite(f: &mut impl FnMut(f64) -> f64, a: f64) -> impl FnMut(f64) -> f64 + '_ {
    move |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let v = f(a + t / u) / (u * u);
        if v.is_finite() { v } else { 0.0 }
    }
}

/// Adaptive Gauss–Kronrod on [a, b] (b may be +∞) with a tanh-sinh fallback.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::domain("integration bounds must be finite, or +inf as upper bound"));
    }
    if b == f64::INFINITY {
        let mut g = semi_infinite(&mut f, a);
        return integrate_finite(&mut g, 0.0, 1.0, spec);
    }
    if b < a {
        return integrate(f, b, a, spec).map(|v| -v);
    }
    if a == b {
        return Ok(0.0);
    }
    integrate_finite(&mut f, a, b, spec)
}

fn integrate_finite(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (r0, e0) = gk21(f, a, b);
    let mut intervals = vec![(a, b, r0, e0)];
    let mut total = r0;
    let mut err = e0;
    let mut splits = 0;
    while err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if splits >= spec.max_subdivisions {
            return tanh_sinh_fallback(f, a, b, spec, total, err);
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (lo, hi, r, e) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval cannot be split further in floating point.
            return tanh_sinh_fallback(f, a, b, spec, total, err);
        }
        let (r1, e1) = gk21(f, lo, mid);
        let (r2, e2) = gk21(f, mid, hi);
        total += r1 + r2 - r;
        err += e1 + e2 - e;
        intervals.push((lo, mid, r1, e1));
        intervals.push((mid, hi, r2, e2));
        splits += 1;
        if splits % 64 == 0 {
            // Refresh the running sums to shed accumulated rounding.
            total = intervals.iter().map(|iv| iv.2).sum();
            err = intervals.iter().map(|iv| iv.3).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::Numerical("integrand produced non-finite values".into()));
    }
    Ok(total)
}

fn tanh_sinh_fallback(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    gk_estimate: f64,
    gk_error: f64,
) -> Result<f64> {
    match integrate_tanh_sinh(f, a, b, spec) {
        Ok(v) => Ok(v),
        Err(Error::Convergence { estimate, error_bound, .. }) if error_bound > gk_error => {
            Err(Error::Convergence {
                message: "adaptive quadrature exhausted its subdivision budget".into(),
                estimate: gk_estimate,
                error_bound: gk_error,
                history: vec![estimate],
            })
        }
        Err(e) => Err(e),
    }
}

/// Double-exponential quadrature on a finite interval; robust to endpoint singularities.
pub fn integrate_tanh_sinh(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let tmax = 3.5;
    let mut h = 0.5;
    let eval = |f: &mut dyn FnMut(f64) -> f64, t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let ch = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let d = half / (s.exp() * ch);
        let (xl, xh) = (a + d, b - d);
        let mut acc = 0.0;
        if xl > a && xl < b {
            let v = f(xl);
            if v.is_finite() {
                acc += v * w;
            }
        }
        if t != 0.0 && xh > a && xh < b {
            let v = f(xh);
            if v.is_finite() {
                acc += v * w;
            }
        }
        acc
    };
    let mut sum = eval(f, 0.0);
    let mut t = h;
    while t <= tmax {
        sum += eval(f, t);
        t += h;
    }
    let mut estimate = sum * h * half;
    let mut prev_err = f64::INFINITY;
    for _ in 0..10 {
        h *= 0.5;
        let mut t = h;
        while t <= tmax {
            sum += eval(f, t);
            t += 2.0 * h;
        }
        let next = sum * h * half;
        let err = (next - estimate).abs();
        estimate = next;
        if err <= spec.abs_tol.max(spec.rel_tol * estimate.abs()) {
            return Ok(estimate);
        }
        prev_err = err;
    }
    Err(Error::Convergence {
        message: "tanh-sinh quadrature did not converge".into(),
        estimate,
        error_bound: prev_err,
        history: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn constants_and_polynomials() {
        let s = QuadratureSpec::default();
        assert_relative_eq!(integrate(|_| 1.0, 0.0, 1.0, &s).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(integrate(|x| x.powi(5), -1.0, 2.0, &s).unwrap(), 10.5, max_relative = 1e-14);
        assert_relative_eq!(integrate(|x| x.sin(), 0.0, PI, &s).unwrap(), 2.0, max_relative = 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let s = QuadratureSpec::default();
        let v = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, &s).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let v = integrate(|x| 1.0 / (1.0 + x * x), 0.0, f64::INFINITY, &s).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn t_over_sin_t() {
        let s = QuadratureSpec::default();
        let top = PI * 0.0672;
        let v = integrate(|t: f64| if t == 0.0 { 1.0 } else { t / t.sin() }, 0.0, top, &s).unwrap();
        // high-precision reference
        assert_relative_eq!(v, 0.211_639_401_7, max_relative = 1e-9);
    }

    #[test]
    fn endpoint_singularity() {
        let s = QuadratureSpec::default();
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &s).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, &s).unwrap();
        assert!((v + 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn tanh_sinh_direct() {
        let s = QuadratureSpec::default();
        let v = integrate_tanh_sinh(&mut |x: f64| (1.0 - x * x).sqrt(), -1.0, 1.0, &s).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let s = QuadratureSpec::new(1e-14, 1e-14, 2).unwrap();
        let r = integrate(|x: f64| (50.0 * x).sin() * (1.0 / x.sqrt()), 0.0, 7.0, &s);
        if let Err(Error::Convergence { estimate, .. }) = r {
            assert!(estimate.is_finite());
        }
    }
}
