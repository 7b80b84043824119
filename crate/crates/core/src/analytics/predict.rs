use serde::{Deserialize, Serialize};

use super::sg::{breather_mass, soliton_mass, vacuum_energy_density, vertex_vev, xi_sg};
use crate::error::Result;

/// One analytic prediction with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub parameter_set: String,
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    pub term_flags: String,
}

impl PredictionRow {
    pub const CSV_HEADER: &'static str = "parameter_set,quantity,value,tolerance,term_flags";

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{:.16e},{:e},{}",
            self.parameter_set, self.quantity, self.value, self.tolerance, self.term_flags
        )
    }
}

/// Closed-form predictions for coupling β² and mass parameter M0.
pub fn prediction_table(id: &str, beta2: f64, m0: f64) -> Result<Vec<PredictionRow>> {
    let row = |q: &str, v: f64, tol: f64| PredictionRow {
        parameter_set: id.to_string(),
        quantity: q.to_string(),
        value: v,
        tolerance: tol,
        term_flags: String::new(),
    };
    let xi = xi_sg(beta2)?;
    let m = soliton_mass(beta2, m0)?;
    let mut rows = vec![row("beta2", beta2, 0.0), row("xi_sg", xi, 1e-14), row("soliton_mass", m, 1e-12)];
    let n_max = (1.0 / xi + 1e-12).floor() as u32;
    for n in 1..=n_max.min(3) {
        rows.push(row(&format!("breather_mass_{n}"), breather_mass(n, m, beta2)?, 1e-12));
    }
    if xi < 1.0 {
        rows.push(row("vacuum_energy_density", vacuum_energy_density(m, beta2)?, 1e-12));
    }
    if m > 0.0 {
        let m1 = breather_mass(1, m, beta2)?;
        rows.push(row("vertex_vev", vertex_vev(beta2, m1)?, 1e-12));
    }
    Ok(rows)
}
