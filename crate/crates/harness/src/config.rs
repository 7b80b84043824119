//! Experiment configuration, read from TOML.
//!
//! ```toml
//! id = "fig3_vertex_scan"
//! model = "qec"
//! kind = "vertex_scan"
//! seed = 1
//!
//! [qec]            # base lattice parameters, grid axes override them
//! e_j = 1.55
//!
//! [grid]
//! e_j = [1.1, 1.55, 2.0]
//! e_j0 = [0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064]
//!
//! [schedule]
//! chi = [32]
//! max_steps = 2000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use qsg_core::models::{QecParams, XyzParams};
use qsg_core::mps::{DmrgSchedule, InitialState, SweepParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Qec,
    Xyz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Field-theory predictions only.
    Predict,
    /// iDMRG bond-dimension scan: S against ln ξ.
    EntropyScaling,
    /// Two-point decay exponent at E_J0 = 0 for each E_J.
    Luttinger,
    /// Finite chains of several lengths fitted to the Cardy form.
    Cardy,
    /// ⟨e^{iφ}⟩ over an E_J × E_J0 grid.
    VertexScan,
    /// iDMRG vertex correlator against the form-factor series.
    Correlator,
    /// XYZ chain along a mass scan: DMRG entanglement spacing against CTM.
    XyzScan,
    /// QEC and XYZ entanglement spacings over a shared mass scan.
    EsComparison,
    /// CTM spacing against 1/ln(l/4) for several couplings.
    CtmAsymptotic,
}

/// Parameter axes. Only the axes an experiment reads need to be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub e_j: Vec<f64>,
    pub e_j0: Vec<f64>,
    pub chi: Vec<usize>,
    pub lengths: Vec<usize>,
    pub beta2_over_8pi: Vec<f64>,
    /// Anisotropy parameter l for CTM scans.
    pub l: Vec<f64>,
    pub r_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Bond dimension per sweep (finite) or per growth step (infinite); the last repeats.
    pub chi: Vec<usize>,
    pub sv_cutoff: f64,
    pub lanczos_tol: f64,
    pub energy_tol: f64,
    pub entropy_tol: f64,
    pub max_steps: usize,
    pub lanczos_max_iter: usize,
    /// Charge (QEC) or spin index for a product initial state; random if absent.
    pub product_state: Option<usize>,
    /// Pinning field for ordered phases (iDMRG only).
    pub pin_field: f64,
    pub pin_steps: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            chi: vec![32],
            sv_cutoff: 1e-10,
            lanczos_tol: 1e-12,
            energy_tol: 1e-10,
            entropy_tol: 1e-8,
            max_steps: 40,
            lanczos_max_iter: 400,
            product_state: None,
            pin_field: 0.0,
            pin_steps: 0,
        }
    }
}

impl ScheduleConfig {
    pub fn to_schedule(&self, seed: u64) -> Result<DmrgSchedule> {
        if self.chi.is_empty() {
            return Err(HarnessError::Config("schedule.chi is empty".into()));
        }
        let mut s = DmrgSchedule::ramp(&self.chi)
            .with_seed(seed)
            .with_max_sweeps(self.max_steps)
            .with_tolerances(self.energy_tol, self.entropy_tol);
        s.sweeps = self
            .chi
            .iter()
            .map(|&chi| SweepParams { chi, sv_cutoff: self.sv_cutoff, lanczos_tol: self.lanczos_tol })
            .collect();
        s.lanczos_max_iter = self.lanczos_max_iter;
        if let Some(k) = self.product_state {
            s.initial = InitialState::Product(k);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn with_chi(&self, chi: usize) -> Self {
        Self { chi: vec![chi], ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Explicit index window for scan fits; the middle-decade policy otherwise.
    pub window: Option<[usize; 2]>,
    /// Distance window for two-point fits.
    pub r_window: [usize; 2],
    /// Central charge used by the Cardy fit.
    pub central_charge: f64,
    /// Divide two-point data by e^{−r/ξ} with ξ from the transfer matrix before the
    /// power-law fit, removing the finite-χ envelope.
    pub xi_envelope: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { window: None, r_window: [4, 16], central_charge: 1.0, xi_envelope: false }
    }
}

/// Continuum data for the form-factor comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgConfig {
    pub beta2_over_8pi: f64,
    /// Soliton mass.
    pub mass: f64,
    /// Velocity.
    pub u: f64,
}

/// An acceptance target checked against a named summary quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    /// Tolerance relative to |value| instead of absolute.
    #[serde(default)]
    pub relative: bool,
}

impl Target {
    pub fn check(&self, x: f64) -> bool {
        let tol = if self.relative { self.tolerance * self.value.abs() } else { self.tolerance };
        (x - self.value).abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a checkpoint per converged state.
    pub checkpoints: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), checkpoints: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub model: Model,
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub qec: QecParams,
    #[serde(default = "default_xyz")]
    pub xyz: XyzParams,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sg: Option<SgConfig>,
    #[serde(default)]
    pub targets: Vec<Target>,
}

fn default_seed() -> u64 {
    1
}

fn default_xyz() -> XyzParams {
    XyzParams::new(1.0, 1.0, 0.0)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks that the axes the experiment needs are present and sane.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let need = |ok: bool, what: &str| {
            if ok { Ok(()) } else { Err(HarnessError::Config(format!("{}: {what}", self.id))) }
        };
        need(!self.id.trim().is_empty(), "experiment id is empty")?;
        self.qec.validate()?;
        self.schedule.to_schedule(self.seed)?;
        let qec_only = |k: &str| need(self.model == Model::Qec, &format!("{k} runs on the qec model"));
        match self.kind {
            ExperimentKind::Predict => need(!g.e_j0.is_empty() && !g.beta2_over_8pi.is_empty(), "grid.e_j0 and grid.beta2_over_8pi must be non-empty")?,
            ExperimentKind::EntropyScaling => need(g.chi.len() >= 4, "grid.chi needs at least 4 bond dimensions")?,
            ExperimentKind::Luttinger => {
                qec_only("luttinger")?;
                need(!g.e_j.is_empty(), "grid.e_j must be non-empty")?
            }
            ExperimentKind::Cardy => need(g.lengths.len() >= 4, "grid.lengths needs at least 4 sizes")?,
            ExperimentKind::VertexScan => {
                qec_only("vertex_scan")?;
                need(!g.e_j.is_empty() && g.e_j0.len() >= 3, "grid.e_j and grid.e_j0 (>= 3 points) required")?;
                need(
                    g.beta2_over_8pi.is_empty() || g.beta2_over_8pi.len() == g.e_j.len(),
                    "grid.beta2_over_8pi, when given, lists one expected coupling per grid.e_j",
                )?
            }
            ExperimentKind::Correlator => {
                qec_only("correlator")?;
                need(self.sg.is_some(), "correlator needs an [sg] section")?;
                need(g.r_max.unwrap_or(0) >= 2, "grid.r_max must be at least 2")?
            }
            ExperimentKind::XyzScan => need(!g.e_j0.is_empty() && g.beta2_over_8pi.len() == 1, "grid.e_j0 and a single grid.beta2_over_8pi required")?,
            ExperimentKind::EsComparison => need(g.e_j0.len() >= 3 && g.beta2_over_8pi.len() == 1, "grid.e_j0 (>= 3) and a single grid.beta2_over_8pi required")?,
            ExperimentKind::CtmAsymptotic => need(g.l.len() >= 3 && !g.beta2_over_8pi.is_empty(), "grid.l (>= 3) and grid.beta2_over_8pi required")?,
        }
        for x in g.e_j0.iter().chain(&g.e_j).chain(&g.l) {
            need(x.is_finite() && *x >= 0.0, "grid values must be finite and non-negative")?;
        }
        let [r0, r1] = self.fit.r_window;
        need(r0 >= 1 && r1 > r0 + 1, "fit.r_window must span at least 3 distances")?;
        let mut seen = std::collections::HashSet::new();
        for t in &self.targets {
            need(seen.insert(t.quantity.as_str()), &format!("target {} declared twice", t.quantity))?;
        }
        for b in &g.beta2_over_8pi {
            need(*b > 0.0 && *b < 1.0, "beta2_over_8pi must lie in (0, 1)")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
id = "vertex"
model = "qec"
kind = "vertex_scan"

[qec]
e_j = 1.55

[grid]
e_j = [1.55]
e_j0 = [0.001, 0.01, 0.1]

[schedule]
chi = [16, 32]
max_steps = 100
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.qec.n_max, 4);
        assert_eq!(c.grid.e_j0.len(), 3);
        let s = c.schedule.to_schedule(c.seed).unwrap();
        assert_eq!(s.sweeps.len(), 2);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let bad = SAMPLE.replace("e_j0 = [0.001, 0.01, 0.1]", "e_j0 = []");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(HarnessError::Config(_))));
        let typo = SAMPLE.replace("max_steps", "max_stepz");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
    }
}
