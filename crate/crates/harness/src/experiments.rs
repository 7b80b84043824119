//! Experiment drivers. Grid points run independently through `par_map`; results are
//! merged back in grid order, and a failing point is recorded without stopping the run.

use std::f64::consts::PI;
use std::fmt::Display;

use log::{info, warn};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, ScheduleConfig, Target};
use crate::error::{HarnessError, Result};
use crate::fit::{
    extract_es_spacing, fit_cardy, fit_central_charge, fit_linear, middle_window, FitResult,
};
use qsg_core::analytics::{
    ctm_along_critical_path, ctm_level_spacing, ctm_spacing_asymptotic, prediction_table,
    principal_regime, two_point_ff_terms, FormFactorTerms,
};
use qsg_core::models::{
    build_qec_mpo, build_xyz_mpo, pauli, qec_to_sg, sg_to_xyz_relaxed, vertex_operator_matrix,
    xyz_to_sg, ChainLength, Pauli, QecParams, SgParams, XyzParams,
};
use qsg_core::mps::{
    correlation_length, entanglement_entropy, entanglement_spectrum, measure_local,
    measure_two_point, run_finite_dmrg_report, Checkpoint, IdmrgRun, MpoOperator, MpsState,
};
use qsg_core::par::par_map;
use qsg_core::tensor::DenseTensor;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.unwrap_or(f64::NAN))
    }
}

macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

/// A per-point table. Every row starts with the experiment id and the grid point index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        let mut cols = vec!["experiment".to_string(), "point".to_string()];
        cols.extend(columns.iter().map(|c| c.to_string()));
        Self { name: name.into(), columns: cols, rows: Vec::new() }
    }

    fn push(&mut self, id: &str, point: usize, mut cells: Vec<Cell>) {
        debug_assert_eq!(cells.len() + 2, self.columns.len(), "table {}", self.name);
        cells.insert(0, Cell::Int(point as i64));
        cells.insert(0, Cell::Text(id.into()));
        self.rows.push(cells);
    }

    /// Numeric column by name; text cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }
}

/// A named scalar result, checked against a declared target if there is one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub target: Option<Target>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: FitResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointFailure {
    pub point: usize,
    pub params: String,
    pub error: String,
}

/// Everything an experiment produced, before it is written to disk.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub id: String,
    pub tables: Vec<Table>,
    pub fits: Vec<NamedFit>,
    pub quantities: Vec<Quantity>,
    pub failures: Vec<PointFailure>,
    pub warnings: Vec<String>,
    /// Converged states keyed by a file stem, written only when checkpoints are enabled.
    pub states: Vec<(String, Checkpoint<f64>)>,
}

impl ExperimentOutput {
    fn new(id: &str) -> Self {
        Self { id: id.into(), ..Self::default() }
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    fn put(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.push(Quantity { name: name.into(), value, target: None, pass: None });
    }

    fn put_fit(&mut self, name: impl Into<String>, fit: FitResult) {
        self.fits.push(NamedFit { name: name.into(), fit });
    }

    fn fail(&mut self, point: usize, params: impl Display, err: impl Display) {
        warn!("{}: point {point} ({params}) failed: {err}", self.id);
        self.failures.push(PointFailure { point, params: params.to_string(), error: err.to_string() });
    }

    /// Attaches declared targets to quantities. A target naming a missing quantity fails.
    pub fn apply_targets(&mut self, targets: &[Target]) {
        for t in targets {
            match self.quantities.iter_mut().find(|q| q.name == t.quantity) {
                Some(q) => {
                    q.pass = Some(t.check(q.value));
                    q.target = Some(t.clone());
                }
                None => self.quantities.push(Quantity {
                    name: t.quantity.clone(),
                    value: f64::NAN,
                    target: Some(t.clone()),
                    pass: Some(false),
                }),
            }
        }
    }

    /// True unless some declared target failed.
    pub fn targets_pass(&self) -> bool {
        self.quantities.iter().all(|q| q.pass != Some(false))
    }
}

/// Lattice regularization of one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lattice {
    Qec(QecParams),
    Xyz(XyzParams),
}

impl Lattice {
    pub fn mpo(&self, length: ChainLength) -> Result<MpoOperator<f64>> {
        Ok(match self {
            Lattice::Qec(p) => build_qec_mpo(p, length)?,
            Lattice::Xyz(p) => build_xyz_mpo(p, length)?,
        })
    }

    /// Order-parameter field used to pin symmetry-broken states: σˣ, or 2cos φ.
    pub fn pin_operator(&self) -> DenseTensor<f64> {
        match self {
            Lattice::Xyz(_) => pauli(Pauli::X),
            Lattice::Qec(p) => {
                let d = p.local_dim();
                DenseTensor::from_fn(vec![d, d], |i| if i[0].abs_diff(i[1]) == 1 { 1.0 } else { 0.0 })
            }
        }
    }

    /// The operator whose expectation is the lattice vertex field: e^{iφ} or σ⁺.
    pub fn vertex(&self) -> Result<DenseTensor<f64>> {
        Ok(match self {
            Lattice::Qec(p) => vertex_operator_matrix(p.n_max)?,
            Lattice::Xyz(_) => pauli(Pauli::Plus),
        })
    }
}

impl Display for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lattice::Qec(p) => write!(f, "qec E_J={} E_J0={} n_max={}", p.e_j, p.e_j0, p.n_max),
            Lattice::Xyz(p) => write!(f, "xyz Jx={} Jy={} Jz={}", p.jx, p.jy, p.jz),
        }
    }
}

/// Builds an iDMRG run, pinned if the schedule asks for it.
pub fn start_idmrg(lat: &Lattice, sched: &ScheduleConfig, seed: u64) -> Result<IdmrgRun<f64>> {
    let h = lat.mpo(ChainLength::Infinite)?;
    let run = IdmrgRun::new(&h, &sched.to_schedule(seed)?)?;
    if sched.pin_field != 0.0 && sched.pin_steps > 0 {
        Ok(run.with_pinning(&h, &lat.pin_operator(), sched.pin_field, sched.pin_steps)?)
    } else {
        Ok(run)
    }
}

/// Summary of an infinite ground state.
#[derive(Clone, Debug)]
pub struct InfinitePoint {
    pub state: MpsState<f64>,
    pub energy_density: f64,
    pub steps: usize,
    pub converged: bool,
    pub entropy: f64,
    /// None when the transfer matrix is degenerate.
    pub xi: Option<f64>,
}

impl InfinitePoint {
    pub fn from_run(run: &IdmrgRun<f64>) -> Result<Self> {
        let state = run.state()?;
        let energy_density = run
            .energy_density()
            .ok_or_else(|| HarnessError::Output("no energy density after the run".into()))?;
        Ok(Self {
            entropy: entanglement_entropy(&state, 0)?,
            xi: correlation_length(&state).ok(),
            energy_density,
            steps: run.steps(),
            converged: run.converged(),
            state,
        })
    }
}

/// Runs iDMRG to convergence or to the step budget. Unconverged states are returned with
/// `converged = false`; the caller records the flag.
pub fn infinite_ground_state(lat: &Lattice, sched: &ScheduleConfig, seed: u64) -> Result<InfinitePoint> {
    let mut run = start_idmrg(lat, sched, seed)?;
    run.run()?;
    if !run.converged() {
        warn!("{lat}: iDMRG stopped unconverged after {} steps", run.steps());
    }
    InfinitePoint::from_run(&run)
}

/// ⟨e^{iφ_0} e^{−iφ_r}⟩ for r = 1..=r_max (real for real states).
pub fn vertex_correlator(lat: &Lattice, state: &MpsState<f64>, r_max: usize) -> Result<Vec<(usize, f64)>> {
    let v = lat.vertex()?;
    let vd = v.adjoint()?;
    Ok(measure_two_point(state, &vd, &v, r_max)?.into_iter().map(|(r, c)| (r, c.re)).collect())
}

/// Power-law fit ln C = slope·ln r + const over `r_window` (inclusive). With `xi` given the
/// data is first multiplied by e^{r/ξ}.
pub fn power_law_fit(corr: &[(usize, f64)], xi: Option<f64>, r_window: [usize; 2]) -> Result<FitResult> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &(r, c) in corr.iter().filter(|(r, _)| (r_window[0]..=r_window[1]).contains(r)) {
        if !(c > 0.0) {
            return Err(HarnessError::Fit(format!("correlator not positive at r = {r}: {c}")));
        }
        let env = xi.map_or(0.0, |x| r as f64 / x);
        xs.push((r as f64).ln());
        ys.push(c.ln() + env);
    }
    fit_linear(&xs, &ys, None)
}

/// XYZ couplings matching the QEC mass parameter E_J0 (M0 = E_J0/E_C0) at coupling β²/8π.
pub fn xyz_for_mass(b8: f64, e_j0: f64, qec: &QecParams) -> Result<(XyzParams, SgParams, Option<String>)> {
    let sg = qec_to_sg(8.0 * b8, &QecParams { e_j0, ..*qec }, 1.0)?;
    let (p, w) = sg_to_xyz_relaxed(sg.beta2, sg.m, qec.a)?;
    Ok((p, sg, w.map(|w| w.message)))
}

fn window_for(cfg: &ExperimentConfig, n: usize) -> std::ops::Range<usize> {
    match cfg.fit.window {
        Some([a, b]) => a.min(n)..b.min(n),
        None => middle_window(n),
    }
}

/// Runs one experiment. Sub-operation errors are recorded per point; only configuration
/// errors and fits that cannot be formed at all abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    info!("{}: running {:?}", cfg.id, cfg.kind);
    let mut out = match cfg.kind {
        ExperimentKind::Predict => predict(cfg)?,
        ExperimentKind::EntropyScaling => entropy_scaling(cfg)?,
        ExperimentKind::Luttinger => luttinger(cfg)?,
        ExperimentKind::Cardy => cardy(cfg)?,
        ExperimentKind::VertexScan => vertex_scan(cfg)?,
        ExperimentKind::Correlator => correlator(cfg)?,
        ExperimentKind::XyzScan => xyz_scan(cfg)?,
        ExperimentKind::EsComparison => es_comparison(cfg)?,
        ExperimentKind::CtmAsymptotic => ctm_asymptotic(cfg)?,
    };
    out.apply_targets(&cfg.targets);
    Ok(out)
}

fn base_lattice(cfg: &ExperimentConfig) -> Lattice {
    match cfg.model {
        crate::config::Model::Qec => Lattice::Qec(cfg.qec),
        crate::config::Model::Xyz => Lattice::Xyz(cfg.xyz),
    }
}

fn predict(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let mut t = Table::new("predictions", &["beta2_over_8pi", "m0", "quantity", "value", "tolerance", "term_flags"]);
    let points: Vec<(f64, f64)> = cfg
        .grid
        .beta2_over_8pi
        .iter()
        .flat_map(|&b| cfg.grid.e_j0.iter().map(move |&m| (b, m)))
        .collect();
    let res = par_map(&points, |&(b, m0)| prediction_table(&cfg.id, 8.0 * PI * b, m0));
    for (i, (r, &(b, m0))) in res.into_iter().zip(&points).enumerate() {
        match r {
            Ok(rows) => {
                for row in rows {
                    t.push(&cfg.id, i, cells![b, m0, row.quantity, row.value, row.tolerance, row.term_flags]);
                }
            }
            Err(e) => out.fail(i, format!("beta2/8pi={b} M0={m0}"), e),
        }
    }
    out.tables.push(t);
    Ok(out)
}

fn entropy_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let lat = base_lattice(cfg);
    let mut chis = cfg.grid.chi.clone();
    chis.sort_unstable();
    chis.dedup();
    let mut t = Table::new("chi_scan", &["chi", "steps", "converged", "energy_density", "entropy", "xi"]);
    let mut run = start_idmrg(&lat, &cfg.schedule.with_chi(chis[0]), cfg.seed)?;
    let (mut s, mut xi) = (Vec::new(), Vec::new());
    for (i, &chi) in chis.iter().enumerate() {
        // Each bond dimension continues from the previous state with a fresh budget.
        let stage = (|| -> Result<InfinitePoint> {
            if i > 0 {
                run.set_chi(chi)?;
            }
            let stop = run.steps() + cfg.schedule.max_steps;
            while !run.converged() && run.steps() < stop {
                run.step()?;
            }
            InfinitePoint::from_run(&run)
        })();
        match stage {
            Ok(p) => {
                info!("{}: chi {chi} S {:.6} xi {:?}", cfg.id, p.entropy, p.xi);
                t.push(&cfg.id, i, cells![chi, p.steps, p.converged, p.energy_density, p.entropy, p.xi]);
                if !p.converged {
                    out.warnings.push(format!("chi {chi} not converged after {} steps", p.steps));
                }
                if let Some(x) = p.xi {
                    s.push(p.entropy);
                    xi.push(x);
                }
                if cfg.output.checkpoints {
                    let ck = Checkpoint::new(p.state, Some(run.schedule().clone()), Some(p.energy_density));
                    out.states.push((format!("chi{chi}"), ck));
                }
            }
            Err(e) => {
                out.fail(i, format!("{lat} chi={chi}"), e);
                break;
            }
        }
    }
    out.tables.push(t);
    match fit_central_charge(&s, &xi) {
        Ok(f) => {
            if f.non_monotone {
                out.warnings.push("correlation length not monotone in chi".into());
            }
            out.put("central_charge", f.c);
            out.put("central_charge_err", f.c_err);
            out.put_fit("entropy_vs_ln_xi", f.fit);
        }
        Err(e) => out.warnings.push(format!("central charge fit: {e}")),
    }
    Ok(out)
}

/// Critical two-point decay for each E_J: K = −2·slope, β²/8π = K/8.
fn luttinger(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let r_max = cfg.grid.r_max.unwrap_or(2 * cfg.fit.r_window[1]).max(cfg.fit.r_window[1]);
    let lats: Vec<Lattice> = cfg.grid.e_j.iter().map(|&e_j| Lattice::Qec(QecParams { e_j, e_j0: 0.0, ..cfg.qec })).collect();
    let res = par_map(&lats, |lat| -> Result<(InfinitePoint, Vec<(usize, f64)>, FitResult)> {
        let p = infinite_ground_state(lat, &cfg.schedule, cfg.seed)?;
        let corr = vertex_correlator(lat, &p.state, r_max)?;
        let env = if cfg.fit.xi_envelope { p.xi } else { None };
        let fit = power_law_fit(&corr, env, cfg.fit.r_window)?;
        Ok((p, corr, fit))
    });
    let mut summary = Table::new("luttinger", &["e_j", "steps", "converged", "energy_density", "entropy", "xi", "slope", "slope_err", "k", "beta2_over_8pi"]);
    let mut corr_t = Table::new("correlator", &["e_j", "r", "c"]);
    for (i, (r, lat)) in res.into_iter().zip(&lats).enumerate() {
        let e_j = cfg.grid.e_j[i];
        match r {
            Ok((p, corr, fit)) => {
                let k = -2.0 * fit.slope;
                summary.push(&cfg.id, i, cells![e_j, p.steps, p.converged, p.energy_density, p.entropy, p.xi, fit.slope, fit.slope_err(), k, k / 8.0]);
                for (r, c) in corr {
                    corr_t.push(&cfg.id, i, cells![e_j, r, c]);
                }
                out.put(format!("k[e_j={e_j}]"), k);
                out.put(format!("beta2_over_8pi[e_j={e_j}]"), k / 8.0);
                out.put(format!("energy_density[e_j={e_j}]"), p.energy_density);
                out.put_fit(format!("log_correlator[e_j={e_j}]"), fit);
                if cfg.output.checkpoints {
                    out.states.push((format!("e_j{e_j}"), Checkpoint::new(p.state, Some(cfg.schedule.to_schedule(cfg.seed)?), Some(p.energy_density))));
                }
            }
            Err(e) => out.fail(i, lat, e),
        }
    }
    out.tables.push(summary);
    out.tables.push(corr_t);
    Ok(out)
}

/// Open chains of several lengths fitted to E(L) = E0·L + b − πcu/(24L), with the iDMRG
/// energy density of the same couplings as a cross-check.
fn cardy(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let lat = base_lattice(cfg);
    let sched = cfg.schedule.to_schedule(cfg.seed)?;
    let lengths = cfg.grid.lengths.clone();
    let res = par_map(&lengths, |&l| -> Result<(f64, usize, bool, f64)> {
        let h = lat.mpo(ChainLength::Finite(l))?;
        let r = run_finite_dmrg_report(&h, l, &sched)?;
        Ok((r.energy, r.sweeps, r.converged, r.max_discarded_weight))
    });
    let mut t = Table::new("energies", &["length", "energy", "sweeps", "converged", "max_discarded_weight"]);
    let (mut ls, mut es) = (Vec::new(), Vec::new());
    for (i, r) in res.into_iter().enumerate() {
        let l = lengths[i];
        match r {
            Ok((e, sweeps, conv, dw)) => {
                t.push(&cfg.id, i, cells![l, e, sweeps, conv, dw]);
                if !conv {
                    out.warnings.push(format!("L = {l} not converged"));
                }
                ls.push(l);
                es.push(e);
            }
            Err(e) => out.fail(i, format!("{lat} L={l}"), e),
        }
    }
    out.tables.push(t);
    let f = fit_cardy(&ls, &es, cfg.fit.central_charge)?;
    out.put("e0", f.e0);
    out.put("u", f.u);
    out.put("b", f.b);
    out.put("cardy_residual_rms", f.residual_rms);
    match infinite_ground_state(&lat, &cfg.schedule, cfg.seed) {
        Ok(p) => {
            out.put("e0_idmrg", p.energy_density);
            out.put("e0_difference", f.e0 - p.energy_density);
        }
        Err(e) => out.fail(lengths.len(), format!("{lat} iDMRG reference"), e),
    }
    Ok(out)
}

/// ⟨e^{iφ}⟩ over E_J × E_J0 and, per E_J, the slope of ln⟨e^{iφ}⟩ against ln(M0/2).
fn vertex_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let g = &cfg.grid;
    let points: Vec<(usize, f64)> = (0..g.e_j.len()).flat_map(|a| g.e_j0.iter().map(move |&m| (a, m))).collect();
    let res = par_map(&points, |&(a, e_j0)| -> Result<(InfinitePoint, f64)> {
        let lat = Lattice::Qec(QecParams { e_j: g.e_j[a], e_j0, ..cfg.qec });
        let p = infinite_ground_state(&lat, &cfg.schedule, cfg.seed)?;
        let v = measure_local(&p.state, &lat.vertex()?, 0)?.norm();
        Ok((p, v))
    });
    let mut t = Table::new("vertex", &["e_j", "e_j0", "m0_half", "steps", "converged", "energy_density", "xi", "vertex"]);
    let mut curves: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); g.e_j.len()];
    for (i, (r, &(a, e_j0))) in res.into_iter().zip(&points).enumerate() {
        match r {
            Ok((p, v)) => {
                t.push(&cfg.id, i, cells![g.e_j[a], e_j0, e_j0 / 2.0, p.steps, p.converged, p.energy_density, p.xi, v]);
                curves[a].0.push((e_j0 / 2.0).ln());
                curves[a].1.push(v.ln());
            }
            Err(e) => out.fail(i, format!("E_J={} E_J0={e_j0}", g.e_j[a]), e),
        }
    }
    out.tables.push(t);
    let mut st = Table::new("slopes", &["e_j", "slope", "slope_err", "beta2_over_8pi_from_slope", "expected_beta2_over_8pi", "expected_xi_sg", "relative_error"]);
    for (a, (xs, ys)) in curves.into_iter().enumerate() {
        let e_j = g.e_j[a];
        let f = match fit_linear(&xs, &ys, Some(window_for(cfg, xs.len()))) {
            Ok(f) => f,
            Err(e) => {
                out.warnings.push(format!("E_J = {e_j}: slope fit failed: {e}"));
                continue;
            }
        };
        // slope = ξ = b/(1−b) with b = β²/8π
        let b_fit = f.slope / (1.0 + f.slope);
        let (exp_b, exp_xi, rel) = match g.beta2_over_8pi.get(a) {
            Some(&b) => {
                let xi = b / (1.0 - b);
                (Some(b), Some(xi), Some((f.slope - xi).abs() / xi))
            }
            None => (None, None, None),
        };
        st.push(&cfg.id, a, cells![e_j, f.slope, f.slope_err(), b_fit, exp_b, exp_xi, rel]);
        out.put(format!("slope[e_j={e_j}]"), f.slope);
        if let Some(r) = rel {
            out.put(format!("slope_relative_error[e_j={e_j}]"), r);
        }
        out.put_fit(format!("log_vertex[e_j={e_j}]"), f);
    }
    out.tables.push(st);
    Ok(out)
}

/// iDMRG correlator against the form-factor series, both normalized by their one-point
/// functions so no parameter is fitted.
fn correlator(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let sgc = cfg.sg.expect("validated");
    let sg = SgParams::from_mass(8.0 * PI * sgc.beta2_over_8pi, sgc.mass, sgc.u, cfg.qec.a)?;
    let r_max = cfg.grid.r_max.expect("validated");
    let lat = Lattice::Qec(cfg.qec);
    let p = infinite_ground_state(&lat, &cfg.schedule, cfg.seed)?;
    let v = measure_local(&p.state, &lat.vertex()?, 0)?.norm();
    let corr = vertex_correlator(&lat, &p.state, r_max)?;
    out.put("energy_density", p.energy_density);
    out.put("vertex", v);
    out.put("xi", p.xi.unwrap_or(f64::NAN));
    out.put("converged", p.converged as u8 as f64);
    let terms = FormFactorTerms::default();
    let ff = par_map(&corr, |&(r, _)| two_point_ff_terms(r as f64, &sg, &terms));
    let mut t = Table::new("correlator", &["r", "c_dmrg", "c_dmrg_normalized", "c_ff_normalized", "relative_error"]);
    let [r0, r1] = cfg.fit.r_window;
    let mut worst: f64 = 0.0;
    for (i, (&(r, c), f)) in corr.iter().zip(ff).enumerate() {
        match f {
            Ok(b) => {
                let dm = c / (v * v);
                let an = b.total() / b.vev_sq;
                let rel = (dm - an).abs() / an.abs();
                if (r0..=r1).contains(&r) {
                    worst = worst.max(rel);
                }
                t.push(&cfg.id, i, cells![r, c, dm, an, rel]);
            }
            Err(e) => out.fail(i, format!("r={r}"), e),
        }
    }
    out.tables.push(t);
    out.put("max_relative_error", worst);
    if cfg.output.checkpoints {
        out.states.push(("state".into(), Checkpoint::new(p.state, Some(cfg.schedule.to_schedule(cfg.seed)?), Some(p.energy_density))));
    }
    Ok(out)
}

struct XyzPoint {
    params: XyzParams,
    warning: Option<String>,
    point: InfinitePoint,
    spacing: f64,
    ctm: f64,
    sigma_plus: f64,
    xi_xyz: f64,
}

fn xyz_point(b8: f64, e_j0: f64, cfg: &ExperimentConfig) -> Result<XyzPoint> {
    let (params, _, warning) = xyz_for_mass(b8, e_j0, &cfg.qec)?;
    let lat = Lattice::Xyz(params);
    let point = infinite_ground_state(&lat, &cfg.schedule, cfg.seed)?;
    let spacing = extract_es_spacing(&entanglement_spectrum(&point.state, 0)?)?;
    let ctm = ctm_level_spacing(&principal_regime(&params)?);
    let sigma_plus = measure_local(&point.state, &lat.vertex()?, 0)?.norm();
    let xi_xyz = xyz_to_sg(&params, cfg.qec.a)?.xi_xyz;
    Ok(XyzPoint { params, warning, point, spacing, ctm, sigma_plus, xi_xyz })
}

/// XYZ chain along a mass scan at fixed β²: DMRG entanglement spacing against CTM.
fn xyz_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let b8 = cfg.grid.beta2_over_8pi[0];
    let res = par_map(&cfg.grid.e_j0, |&m| xyz_point(b8, m, cfg));
    let mut t = Table::new("xyz", &["e_j0", "jx", "jy", "jz", "steps", "converged", "energy_density", "xi", "xi_xyz", "sigma_plus", "es_spacing", "ctm_spacing", "relative_error"]);
    let mut worst: f64 = 0.0;
    for (i, r) in res.into_iter().enumerate() {
        let m = cfg.grid.e_j0[i];
        match r {
            Ok(x) => {
                let rel = (x.spacing - x.ctm).abs() / x.ctm;
                worst = worst.max(rel);
                let p = &x.point;
                t.push(&cfg.id, i, cells![m, x.params.jx, x.params.jy, x.params.jz, p.steps, p.converged, p.energy_density, p.xi, x.xi_xyz, x.sigma_plus, x.spacing, x.ctm, rel]);
                if let Some(w) = x.warning {
                    out.warnings.push(format!("E_J0 = {m}: {w}"));
                }
            }
            Err(e) => out.fail(i, format!("beta2/8pi={b8} E_J0={m}"), e),
        }
    }
    out.tables.push(t);
    out.put("max_relative_error", worst);
    Ok(out)
}

/// QEC and XYZ entanglement spacings over a shared mass scan, and the linear fit
/// ε_QEC = a0 + a1·ε_XYZ.
fn es_comparison(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let b8 = cfg.grid.beta2_over_8pi[0];
    let res = par_map(&cfg.grid.e_j0, |&m| -> Result<(XyzPoint, InfinitePoint, f64)> {
        let x = xyz_point(b8, m, cfg)?;
        let lat = Lattice::Qec(QecParams { e_j0: m, ..cfg.qec });
        let q = infinite_ground_state(&lat, &cfg.schedule, cfg.seed)?;
        let eq = extract_es_spacing(&entanglement_spectrum(&q.state, 0)?)?;
        Ok((x, q, eq))
    });
    let mut t = Table::new("spacings", &["e_j0", "eps_qec", "eps_xyz", "eps_ctm", "qec_converged", "xyz_converged", "qec_xi", "xyz_xi"]);
    let (mut ex, mut eq) = (Vec::new(), Vec::new());
    for (i, r) in res.into_iter().enumerate() {
        let m = cfg.grid.e_j0[i];
        match r {
            Ok((x, q, e)) => {
                t.push(&cfg.id, i, cells![m, e, x.spacing, x.ctm, q.converged, x.point.converged, q.xi, x.point.xi]);
                ex.push(x.spacing);
                eq.push(e);
            }
            Err(e) => out.fail(i, format!("beta2/8pi={b8} E_J0={m}"), e),
        }
    }
    out.tables.push(t);
    let f = fit_linear(&ex, &eq, None)?;
    let range = eq.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - eq.iter().cloned().fold(f64::INFINITY, f64::min);
    out.put("a0", f.intercept);
    out.put("a1", f.slope);
    out.put("residual_rms_over_range", f.residual_rms / range);
    out.put_fit("eps_qec_vs_eps_xyz", f);
    Ok(out)
}

/// ε_XYZ against 1/ln(l/4) along the critical path; the slope should approach
/// −π²(1 − β²/8π).
fn ctm_asymptotic(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(&cfg.id);
    let mut ls = cfg.grid.l.clone();
    ls.sort_by(|a, b| b.total_cmp(a));
    let mut t = Table::new("spacing", &["beta2_over_8pi", "l", "inv_log_l4", "eps_ctm", "eps_asymptotic"]);
    let mut st = Table::new("slopes", &["beta2_over_8pi", "slope", "slope_err", "expected", "relative_error"]);
    for (a, &b8) in cfg.grid.beta2_over_8pi.iter().enumerate() {
        let beta2 = 8.0 * PI * b8;
        let rows = par_map(&ls, |&l| -> Result<(f64, f64)> {
            Ok((ctm_level_spacing(&ctm_along_critical_path(l, beta2)?), ctm_spacing_asymptotic(l, beta2)?))
        });
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (j, (r, &l)) in rows.into_iter().zip(&ls).enumerate() {
            let idx = a * ls.len() + j;
            match r {
                Ok((e, asym)) => {
                    let x = 1.0 / (l / 4.0).ln();
                    t.push(&cfg.id, idx, cells![b8, l, x, e, asym]);
                    xs.push(x);
                    ys.push(e);
                }
                Err(e) => out.fail(idx, format!("beta2/8pi={b8} l={l}"), e),
            }
        }
        let f = match fit_linear(&xs, &ys, Some(window_for(cfg, xs.len()))) {
            Ok(f) => f,
            Err(e) => {
                out.warnings.push(format!("beta2/8pi = {b8}: {e}"));
                continue;
            }
        };
        let expected = -PI * PI * (1.0 - b8);
        let rel = (f.slope - expected).abs() / expected.abs();
        st.push(&cfg.id, a, cells![b8, f.slope, f.slope_err(), expected, rel]);
        out.put(format!("slope_relative_error[beta2_over_8pi={b8}]"), rel);
        out.put_fit(format!("eps_vs_inv_log[beta2_over_8pi={b8}]"), f);
    }
    out.tables.push(t);
    out.tables.push(st);
    Ok(out)
}

/// A single ground-state run at the base couplings: finite DMRG when exactly one length is
/// given, iDMRG otherwise.
pub fn single_run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.qec.validate()?;
    let mut out = ExperimentOutput::new(&cfg.id);
    let lat = base_lattice(cfg);
    let v = lat.vertex()?;
    if let [l] = cfg.grid.lengths[..] {
        let sched = cfg.schedule.to_schedule(cfg.seed)?;
        let r = run_finite_dmrg_report(&lat.mpo(ChainLength::Finite(l))?, l, &sched)?;
        out.put("energy", r.energy);
        out.put("sweeps", r.sweeps as f64);
        out.put("converged", r.converged as u8 as f64);
        out.put("max_discarded_weight", r.max_discarded_weight);
        out.put("entropy_center", entanglement_entropy(&r.state, l / 2)?);
        let mut t = Table::new("profile", &["site", "vertex"]);
        for i in 0..l {
            t.push(&cfg.id, i, cells![i, measure_local(&r.state, &v, i)?.norm()]);
        }
        out.tables.push(t);
        out.states.push(("state".into(), Checkpoint::new(r.state, Some(sched), Some(r.energy))));
    } else {
        let p = infinite_ground_state(&lat, &cfg.schedule, cfg.seed)?;
        out.put("energy_density", p.energy_density);
        out.put("steps", p.steps as f64);
        out.put("converged", p.converged as u8 as f64);
        out.put("entropy", p.entropy);
        out.put("xi", p.xi.unwrap_or(f64::NAN));
        out.put("vertex", measure_local(&p.state, &v, 0)?.norm());
        let es = entanglement_spectrum(&p.state, 0)?;
        if let Ok(s) = extract_es_spacing(&es) {
            out.put("es_spacing", s);
        }
        let mut t = Table::new("entanglement_spectrum", &["level", "multiplicity"]);
        for (i, (l, m)) in es.cluster_means.iter().zip(&es.multiplicities).enumerate() {
            t.push(&cfg.id, i, cells![*l, *m]);
        }
        out.tables.push(t);
        let sched = cfg.schedule.to_schedule(cfg.seed)?;
        out.states.push(("state".into(), Checkpoint::new(p.state, Some(sched), Some(p.energy_density))));
    }
    out.apply_targets(&cfg.targets);
    Ok(out)
}
