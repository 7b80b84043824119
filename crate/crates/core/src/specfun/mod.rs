//! Special functions and one-dimensional quadrature for the analytic predictions.

mod bessel;
mod elliptic;
mod gamma;
mod quad;

pub use bessel::bessel_k0;
pub use elliptic::{
    elliptic_f, elliptic_i, elliptic_i_from_kprime, jacobi_sn_cn_dn, lambda_from_sn,
    lambda_from_sn_kprime,
};
pub use gamma::{gamma_fn, ln_gamma};
pub use quad::{integrate, integrate_tanh_sinh, QuadratureSpec};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
pub const PI: f64 = std::f64::consts::PI;
