use super::EULER_GAMMA;
use crate::error::{Error, Result};

/// Modified Bessel function of the second kind, order zero.
///
/// Power series for x ≤ 2; above that the trapezoidal rule on
/// K₀(x) = e^{−x} ∫₀^∞ exp(−x(cosh t − 1)) dt, which converges geometrically
/// in the step because the integrand is analytic in a strip of half-width π/2.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::domain(format!("bessel_k0 needs x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 2.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut i0 = 1.0;
        let mut h = 0.0;
        let mut tail = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= q / (kf * kf);
            h += 1.0 / kf;
            i0 += term;
            tail += term * h;
            if term < 1e-18 * i0 {
                break;
            }
        }
        return Ok(-((0.5 * x).ln() + EULER_GAMMA) * i0 + tail);
    }
    Ok((-x).exp() * k0_scaled_integral(x))
}

fn k0_scaled_integral(x: f64) -> f64 {
    // the integrand narrows like 1/sqrt(x); keep h*sqrt(x) fixed past x = 10
    let h = 0.1 * (10.0 / x).sqrt().min(1.0);
    // cosh t − 1 = 2 sinh²(t/2), exact for small t.
    let mut sum = 0.5;
    let mut t = h;
    loop {
        let s = (0.5 * t).sinh();
        let v = (-2.0 * x * s * s).exp();
        sum += v;
        if v < 1e-18 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        assert_relative_eq!(bessel_k0(1.0).unwrap(), 0.421_024_438_240_708_3, max_relative = 1e-13);
        assert_relative_eq!(bessel_k0(0.1).unwrap(), 2.427_069_024_702_016_6, max_relative = 1e-13);
        assert_relative_eq!(bessel_k0(2.0).unwrap(), 0.113_893_872_749_533_4, max_relative = 1e-12);
        assert_relative_eq!(bessel_k0(2.5).unwrap(), 0.062_347_553_200_366_19, max_relative = 1e-12);
        assert_relative_eq!(bessel_k0(10.0).unwrap(), 1.778_006_231_616_765_2e-5, max_relative = 1e-12);
    }

    #[test]
    fn limits() {
        let x = 1e-6;
        assert!((bessel_k0(x).unwrap() + (x / 2.0).ln() + EULER_GAMMA).abs() < 1e-6);
        let x = 50.0;
        let r = bessel_k0(x).unwrap() * x.exp() * (2.0 * x / std::f64::consts::PI).sqrt();
        assert!((r - 1.0).abs() < 1e-2);
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k0(-1.0).is_err());
    }
}
