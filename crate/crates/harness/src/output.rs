//! CSV tables, checkpoints and the JSON summary of one experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiments::{ExperimentOutput, NamedFit, PointFailure, Quantity, Table};
use qsg_core::mps::DmrgSchedule;

/// Where a number came from. Contains nothing time- or host-dependent so that repeated
/// runs produce identical summaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub parallel: bool,
    pub schedule: DmrgSchedule,
    pub units: &'static str,
    /// The full configuration as run, in TOML.
    pub config: String,
}

impl Provenance {
    pub fn new(cfg: &ExperimentConfig, threads: usize) -> Result<Self> {
        Ok(Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment: cfg.id.clone(),
            seed: cfg.seed,
            threads,
            parallel: qsg_core::par::is_parallel(),
            schedule: cfg.schedule.to_schedule(cfg.seed)?,
            units: "E_C0 = 1, a = 1; XYZ energies in units of Jx",
            config: cfg.to_toml()?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRef {
    pub name: String,
    pub path: PathBuf,
    pub rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub provenance: Provenance,
    pub quantities: Vec<Quantity>,
    pub fits: Vec<NamedFit>,
    pub failures: Vec<PointFailure>,
    pub warnings: Vec<String>,
    pub tables: Vec<TableRef>,
    pub checkpoints: Vec<PathBuf>,
    /// False if any declared target failed.
    pub pass: bool,
}

pub fn write_table(t: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Output(e.to_string()))?;
    w.write_record(&t.columns).map_err(|e| HarnessError::Output(e.to_string()))?;
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.render())).map_err(|e| HarnessError::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<dir>/<id>_<table>.csv`, checkpoints under `<dir>/checkpoints/`, and
/// `<dir>/<id>_summary.json`. Returns the summary.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path, threads: usize) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let mut tables = Vec::new();
    for t in &out.tables {
        let path = dir.join(format!("{}_{}.csv", cfg.id, t.name));
        write_table(t, &path)?;
        tables.push(TableRef { name: t.name.clone(), path, rows: t.rows.len() });
    }
    let mut checkpoints = Vec::new();
    if cfg.output.checkpoints && !out.states.is_empty() {
        let cdir = dir.join("checkpoints");
        fs::create_dir_all(&cdir)?;
        for (stem, ck) in &out.states {
            let path = cdir.join(format!("{}_{stem}.json", cfg.id));
            ck.save(&path)?;
            checkpoints.push(path);
        }
    }
    let summary = Summary {
        provenance: Provenance::new(cfg, threads)?,
        quantities: out.quantities.clone(),
        fits: out.fits.clone(),
        failures: out.failures.clone(),
        warnings: out.warnings.clone(),
        tables,
        checkpoints,
        pass: out.targets_pass(),
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::Output(e.to_string()))?;
    fs::write(dir.join(format!("{}_summary.json", cfg.id)), text)?;
    Ok(summary)
}

/// Reads one or two numeric columns of a CSV written by [`write_table`].
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::Output(e.to_string()))?;
    let header = r.headers().map_err(|e| HarnessError::Output(e.to_string()))?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| HarnessError::Output(format!("{}: no column {n}", path.display())))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| HarnessError::Output(e.to_string()))?;
        for (c, &j) in cols.iter_mut().zip(&idx) {
            let v = rec[j].parse::<f64>().map_err(|e| HarnessError::Output(format!("{}: {e}", &rec[j])))?;
            c.push(v);
        }
    }
    Ok(cols)
}
