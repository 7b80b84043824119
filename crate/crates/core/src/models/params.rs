use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytics::{soliton_mass, xi_sg};
use crate::error::{Error, Result};

/// Couplings of the Josephson-junction array (energies in units of E_C0 by default).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QecParams {
    pub e_c0: f64,
    /// Nearest-neighbour charging coupling δ.
    pub delta: f64,
    pub e_g: f64,
    /// Horizontal junction energy.
    pub e_j: f64,
    /// Vertical junction energy, the sine-Gordon mass term.
    pub e_j0: f64,
    pub n_max: usize,
    pub a: f64,
}

impl Default for QecParams {
    fn default() -> Self {
        Self { e_c0: 1.0, delta: 0.2, e_g: 0.0, e_j: 1.55, e_j0: 0.0, n_max: 4, a: 1.0 }
    }
}

impl QecParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_c0 > 0.0) {
            return Err(Error::domain(format!("E_C0 must be positive, got {}", self.e_c0)));
        }
        if self.n_max < 1 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::domain(format!("delta = {} outside [0, 1)", self.delta)));
        }
        if ![self.e_g, self.e_j, self.e_j0, self.a].iter().all(|x| x.is_finite()) || !(self.a > 0.0)
        {
            return Err(Error::domain("QEC couplings must be finite and a > 0"));
        }
        Ok(())
    }

    pub fn local_dim(&self) -> usize {
        2 * self.n_max + 1
    }
}

/// Structured note attached to XYZ couplings outside Jx ≥ Jy ≥ |Jz|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeWarning {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub message: String,
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyzParams {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl XyzParams {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Self {
        Self { jx, jy, jz }
    }

    /// `None` inside the scaling regime Jx ≥ Jy ≥ |Jz|.
    pub fn regime_warning(&self) -> Option<RegimeWarning> {
        let ok = self.jx >= self.jy && self.jy >= self.jz.abs();
        (!ok).then(|| RegimeWarning {
            jx: self.jx,
            jy: self.jy,
            jz: self.jz,
            message: format!(
                "couplings ({}, {}, {}) violate Jx >= Jy >= |Jz|; the sine-Gordon scaling limit is not trusted here",
                self.jx, self.jy, self.jz
            ),
        })
    }
}

/// Continuum sine-Gordon data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgParams {
    pub beta2: f64,
    pub xi_sg: f64,
    /// Mass parameter of the action.
    pub m0: f64,
    /// Soliton mass.
    pub m: f64,
    /// Velocity; masses enter correlators through m·r/u.
    pub u: f64,
    pub a: f64,
}

impl SgParams {
    /// From the action parameter M0; the soliton mass follows.
    pub fn from_m0(beta2: f64, m0: f64, u: f64, a: f64) -> Result<Self> {
        let xi = xi_sg(beta2)?;
        let m = soliton_mass(beta2, m0)?;
        Ok(Self { beta2, xi_sg: xi, m0, m, u, a })
    }

    /// From the soliton mass directly.
    pub fn from_mass(beta2: f64, m: f64, u: f64, a: f64) -> Result<Self> {
        let xi = xi_sg(beta2)?;
        let m0 = super::maps::m0_from_soliton_mass(beta2, m)?;
        Ok(Self { beta2, xi_sg: xi, m0, m, u, a })
    }

    pub fn validate(&self) -> Result<()> {
        let xi = xi_sg(self.beta2)?;
        if (xi - self.xi_sg).abs() > 1e-12 * xi.max(1.0) {
            return Err(Error::domain("xi_sg inconsistent with beta2"));
        }
        if !(self.m >= 0.0) {
            return Err(Error::domain("soliton mass must be non-negative"));
        }
        Ok(())
    }

    /// β²/8π, the coupling used in figure legends.
    pub fn beta2_over_8pi(&self) -> f64 {
        self.beta2 / (8.0 * PI)
    }
}
