use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one sweep (finite) or one growth step (infinite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub chi: usize,
    pub sv_cutoff: f64,
    pub lanczos_tol: f64,
}

impl SweepParams {
    pub fn new(chi: usize) -> Self {
        Self { chi, sv_cutoff: 1e-10, lanczos_tol: 1e-12 }
    }
}

/// Starting point of a DMRG run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    /// Random state from `rng_seed`.
    Random,
    /// Every site in the given local basis state (e.g. n = 0 for the Josephson array).
    Product(usize),
}

/// Sweep plan plus convergence criteria. The last sweep entry repeats until convergence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmrgSchedule {
    pub sweeps: Vec<SweepParams>,
    pub energy_tol: f64,
    pub entropy_tol: f64,
    pub max_sweeps: usize,
    pub rng_seed: u64,
    pub initial: InitialState,
    /// Matvec budget per local eigenproblem.
    pub lanczos_max_iter: usize,
}

impl Default for DmrgSchedule {
    fn default() -> Self {
        Self::ramp(&[16, 32, 64])
    }
}

impl DmrgSchedule {
    /// Single bond dimension for every sweep.
    pub fn fixed(chi: usize) -> Self {
        Self::ramp(&[chi])
    }

    /// Bond dimensions growing sweep by sweep; the last one repeats.
    pub fn ramp(chis: &[usize]) -> Self {
        Self {
            sweeps: chis.iter().map(|&c| SweepParams::new(c)).collect(),
            energy_tol: 1e-10,
            entropy_tol: 1e-8,
            max_sweeps: 40,
            rng_seed: 1,
            initial: InitialState::Random,
            lanczos_max_iter: 400,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_max_sweeps(mut self, n: usize) -> Self {
        self.max_sweeps = n;
        self
    }

    pub fn with_tolerances(mut self, energy_tol: f64, entropy_tol: f64) -> Self {
        self.energy_tol = energy_tol;
        self.entropy_tol = entropy_tol;
        self
    }

    pub fn params(&self, sweep: usize) -> SweepParams {
        self.sweeps[sweep.min(self.sweeps.len() - 1)]
    }

    /// True once the schedule has reached its final (repeating) entry.
    pub fn at_final_stage(&self, sweep: usize) -> bool {
        sweep + 1 >= self.sweeps.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps.is_empty() {
            return Err(Error::domain("schedule has no sweeps"));
        }
        if self.sweeps.windows(2).any(|w| w[1].chi < w[0].chi) {
            return Err(Error::domain("bond dimension must be non-decreasing across sweeps"));
        }
        for p in &self.sweeps {
            if p.chi == 0 || !(0.0..1.0).contains(&p.sv_cutoff) || !(p.lanczos_tol > 0.0) {
                return Err(Error::domain(format!("invalid sweep parameters {p:?}")));
            }
        }
        if !(self.energy_tol > 0.0 && self.entropy_tol > 0.0) || self.max_sweeps == 0 {
            return Err(Error::domain("tolerances and max_sweeps must be positive"));
        }
        if self.lanczos_max_iter < 2 {
            return Err(Error::domain("lanczos_max_iter must be at least 2"));
        }
        Ok(())
    }
}
