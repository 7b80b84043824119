use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use faer::Side;
use serde::{Deserialize, Serialize};

use super::env::{boundary_env, update_left, update_right, SiteBlocks, TwoSiteOperator};
use super::mpo::{MpoBoundary, MpoOperator};
use super::schedule::DmrgSchedule;
use super::state::{transfer_left, transfer_right, CanonicalForm, MpsState};
use crate::error::{Error, Result};
use crate::tensor::{
    arnoldi_largest, contract, lanczos_lowest_report, svd_truncate, DenseTensor, Scalar, TruncationPolicy, C64,
};

/// Outcome of an infinite DMRG run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IdmrgResult<T> {
    /// Ground-state energy per site.
    pub energy_density: f64,
    /// Right-canonical two-site unit cell.
    pub state: MpsState<T>,
    pub steps: usize,
    /// Energy density estimate after each step (from step 2 on).
    pub energy_history: Vec<f64>,
    /// Center-bond entropy after each step.
    pub entropy_history: Vec<f64>,
    pub max_discarded_weight: f64,
    pub converged: bool,
}

/// Inverse of a spectrum with tiny values regularized away.
fn inv_spectrum(s: &[f64]) -> Vec<f64> {
    let floor = s.first().copied().unwrap_or(1.0) * 1e-13;
    s.iter().map(|&x| if x > floor { 1.0 / x } else { 0.0 }).collect()
}

/// Scales axis 0 (`left`) or the last axis of a rank-3 tensor by `w`.
fn scale_bond<T: Scalar>(t: &DenseTensor<T>, w: &[f64], left: bool) -> DenseTensor<T> {
    let ax = if left { 0 } else { t.rank() - 1 };
    DenseTensor::from_fn(t.shape().to_vec(), |i| t.get(i) * T::from_real(w[i[ax]]))
}

fn entropy(s: &[f64]) -> f64 {
    s.iter().filter(|&&x| x > 0.0).map(|&x| -x * x * (x * x).ln()).sum()
}

/// Resumable infinite DMRG on a two-site unit cell.
///
/// Each step inserts two sites at the center of a growing chain, so the environments
/// stay exact for the open system of length 2n. Energy per site is half the increment of
/// the total energy between steps.
pub struct IdmrgRun<T: Scalar> {
    schedule: DmrgSchedule,
    blocks: [SiteBlocks<T>; 2],
    pinned: Option<([SiteBlocks<T>; 2], usize)>,
    d: usize,
    lenv: DenseTensor<T>,
    renv: DenseTensor<T>,
    a: DenseTensor<T>,
    b: DenseTensor<T>,
    lam: Vec<f64>,
    lam_prev: Vec<f64>,
    steps: usize,
    total_energy: Vec<f64>,
    densities: Vec<f64>,
    entropies: Vec<f64>,
    max_dw: f64,
    converged: bool,
}

impl<T: Scalar> IdmrgRun<T> {
    pub fn new(h: &MpoOperator<T>, schedule: &DmrgSchedule) -> Result<Self> {
        schedule.validate()?;
        if h.boundary() != MpoBoundary::Infinite {
            return Err(Error::Contract("iDMRG needs an infinite MPO".into()));
        }
        if h.len() != 2 && h.len() != 1 {
            return Err(Error::dim(format!("iDMRG supports a two-site cell, MPO has {}", h.len())));
        }
        let w = h.site(0).shape()[0];
        let d = h.local_dim();
        let one = DenseTensor::from_raw(vec![1, 1, 1], vec![T::one()]);
        Ok(Self {
            schedule: schedule.clone(),
            blocks: [SiteBlocks::new(h, 0), SiteBlocks::new(h, 1)],
            pinned: None,
            d,
            lenv: boundary_env(w, 0),
            renv: boundary_env(w, w - 1),
            a: one.clone(),
            b: one,
            lam: vec![1.0],
            lam_prev: vec![1.0],
            steps: 0,
            total_energy: Vec::new(),
            densities: Vec::new(),
            entropies: Vec::new(),
            max_dw: 0.0,
            converged: false,
        })
    }

    /// Adds `−field · op` on every inserted site during the first `steps` steps.
    ///
    /// The field stays frozen into the environments as a boundary term afterwards, which
    /// selects one symmetry-broken ground state in an ordered phase instead of the cat state.
    pub fn with_pinning(mut self, h: &MpoOperator<T>, op: &DenseTensor<T>, field: f64, steps: usize) -> Result<Self> {
        if self.steps > 0 {
            return Err(Error::Contract("pinning must be set before the first step".into()));
        }
        let hp = h.with_onsite(&op.scale(T::from_real(-field)))?;
        self.pinned = Some(([SiteBlocks::new(&hp, 0), SiteBlocks::new(&hp, 1)], steps));
        Ok(self)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Latest energy-per-site estimate.
    pub fn energy_density(&self) -> Option<f64> {
        self.densities.last().copied()
    }

    /// Θ ≈ Λ_n B_n Λ_{n−1}⁻¹ A_n Λ_n, the translated center of the previous step.
    fn guess(&self) -> DenseTensor<T> {
        if self.steps == 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.schedule.rng_seed);
            return DenseTensor::from_fn(vec![1, self.d, self.d, 1], |_| {
                T::from_re_im(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
        }
        let left = scale_bond(&self.b, &self.lam, true);
        let right = scale_bond(&scale_bond(&self.a, &inv_spectrum(&self.lam_prev), true), &self.lam, false);
        contract(&left, &right, &[(2, 0)]).expect("bond extents agree by construction")
    }

    /// One growth step. Returns the new energy density estimate once two steps are done.
    pub fn step(&mut self) -> Result<Option<f64>> {
        let p = self.schedule.params(self.steps);
        let policy = TruncationPolicy::new(p.chi, p.sv_cutoff, 0.0)?;
        let left_type = self.steps % 2;
        let theta = self.guess();
        let shape = theta.shape().to_vec();
        let (k_l, k_r) = (shape[0], shape[3]);
        let blocks = match &self.pinned {
            Some((b, n)) if self.steps < *n => b,
            _ => &self.blocks,
        };
        let op = TwoSiteOperator { l: &self.lenv, r: &self.renv, w1: &blocks[left_type], w2: &blocks[1 - left_type] };
        let mut v0 = theta.into_data();
        if v0.iter().all(|x| x.modulus() == 0.0) {
            v0.iter_mut().enumerate().for_each(|(i, x)| *x = T::from_real(1.0 + 0.1 * (i as f64).sin()));
        }
        let rep = lanczos_lowest_report(|v| op.apply(v), &v0, p.lanczos_tol, self.schedule.lanczos_max_iter)?;
        let d = self.d;
        let m = DenseTensor::new(vec![k_l * d, d * k_r], rep.v)?;
        let svd = svd_truncate(&m, &policy)?;
        self.max_dw = svd.discarded_weight;
        let k = svd.s.len();
        let nrm = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = svd.u.reshape(vec![k_l, d, k])?;
        let b = svd.v.reshape(vec![k, d, k_r])?;
        self.lenv = update_left(&self.lenv, &a, &blocks[left_type])?;
        self.renv = update_right(&self.renv, &b, &blocks[1 - left_type])?;
        self.a = a;
        self.b = b;
        self.lam_prev = std::mem::replace(&mut self.lam, svd.s.iter().map(|x| x / nrm).collect());
        self.steps += 1;
        let e = rep.e0;
        let density = self.total_energy.last().map(|prev| (e - prev) / 2.0);
        self.total_energy.push(e);
        self.entropies.push(entropy(&self.lam));
        if let Some(x) = density {
            self.densities.push(x);
        }
        let n = self.densities.len();
        let m = self.entropies.len();
        let pin_done = self.pinned.as_ref().map_or(true, |(_, k)| self.steps >= k + 2);
        if n >= 2 && m >= 3 && pin_done && self.schedule.at_final_stage(self.steps - 1) {
            let de = (self.densities[n - 1] - self.densities[n - 2]).abs();
            let ds = (self.entropies[m - 1] - self.entropies[m - 3]).abs();
            self.converged = de <= self.schedule.energy_tol && ds <= self.schedule.entropy_tol;
        } else {
            self.converged = false;
        }
        Ok(density)
    }

    /// Steps until converged or `schedule.max_sweeps` total steps.
    pub fn run(&mut self) -> Result<bool> {
        while !self.converged && self.steps < self.schedule.max_sweeps {
            self.step()?;
        }
        Ok(self.converged)
    }

    /// Raises the step budget of a run, e.g. to continue after a failed convergence.
    pub fn extend(&mut self, extra_steps: usize) {
        self.schedule.max_sweeps = self.steps + extra_steps;
    }

    /// Continues at a new bond dimension from the current fixed point.
    pub fn set_chi(&mut self, chi: usize) -> Result<()> {
        if chi == 0 {
            return Err(Error::domain("chi must be positive"));
        }
        let mut p = self.schedule.params(self.steps);
        p.chi = chi;
        self.schedule.sweeps = vec![p];
        self.converged = false;
        Ok(())
    }

    pub fn schedule(&self) -> &DmrgSchedule {
        &self.schedule
    }

    /// Translation-invariant unit cell of the current fixed point, canonicalized.
    pub fn state(&self) -> Result<MpsState<T>> {
        if self.steps < 2 {
            return Err(Error::Contract("need at least two iDMRG steps for a unit cell".into()));
        }
        let x = scale_bond(&scale_bond(&self.a, &inv_spectrum(&self.lam_prev), true), &self.lam, false);
        let (c1, c2, l1, l2) = canonicalize_cell(&self.b, &x)?;
        // b carries the type of the right site of the last step
        if self.steps % 2 == 1 {
            MpsState::new(vec![c2, c1], vec![l2, l1], CanonicalForm::InfiniteUnitCell(2), self.d)
        } else {
            MpsState::new(vec![c1, c2], vec![l1, l2], CanonicalForm::InfiniteUnitCell(2), self.d)
        }
    }

    pub fn result(&self) -> Result<IdmrgResult<T>> {
        Ok(IdmrgResult {
            energy_density: self.energy_density().ok_or_else(|| Error::Contract("no iDMRG steps yet".into()))?,
            state: self.state()?,
            steps: self.steps,
            energy_history: self.densities.clone(),
            entropy_history: self.entropies.clone(),
            max_discarded_weight: self.max_dw,
            converged: self.converged,
        })
    }
}

/// Runs iDMRG to convergence; errors with the energy history if `max_sweeps` steps are
/// not enough.
pub fn run_idmrg<T: Scalar>(h: &MpoOperator<T>, schedule: &DmrgSchedule) -> Result<IdmrgResult<T>> {
    let mut run = IdmrgRun::new(h, schedule)?;
    run.run()?;
    let r = run.result()?;
    if r.converged {
        return Ok(r);
    }
    let n = r.energy_history.len();
    Err(Error::Convergence {
        message: format!("iDMRG not converged after {} steps", r.steps),
        estimate: r.energy_density,
        error_bound: if n >= 2 { (r.energy_history[n - 1] - r.energy_history[n - 2]).abs() } else { f64::NAN },
        history: r.energy_history,
    })
}

fn to_c64<T: Scalar>(t: &DenseTensor<T>) -> DenseTensor<C64> {
    DenseTensor::from_fn(t.shape().to_vec(), |i| t.get(i).to_c64())
}

/// Dominant fixed point of a transfer map on k×k matrices, normalized to unit trace.
fn fixed_point(apply: impl Fn(&DenseTensor<C64>) -> DenseTensor<C64>, k: usize) -> Result<(C64, DenseTensor<C64>)> {
    let v0: Vec<C64> = (0..k * k).map(|i| C64::new(if i % (k + 1) == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
    let pairs = arnoldi_largest(
        |x| apply(&DenseTensor::from_raw(vec![k, k], x.to_vec())).into_data(),
        &v0,
        1,
        1e-14,
        40.min(k * k),
        200,
    )?;
    let p = &pairs[0];
    let m = DenseTensor::from_raw(vec![k, k], p.vector.clone());
    let tr: C64 = (0..k).map(|i| m.get(&[i, i])).sum();
    let m = m.scale(C64::new(1.0, 0.0) / tr);
    let h = DenseTensor::from_fn(vec![k, k], |i| 0.5 * (m.get(&[i[0], i[1]]) + m.get(&[i[1], i[0]]).conj()));
    Ok((p.value, h))
}

/// Positive part of a Hermitian matrix as (eigenvectors, eigenvalues), small values dropped.
fn positive_part<T: Scalar>(m: &DenseTensor<C64>) -> Result<(DenseTensor<T>, Vec<f64>)> {
    let k = m.shape()[0];
    let mt: DenseTensor<T> = DenseTensor::from_fn(vec![k, k], |i| {
        let z = m.get(i);
        T::from_re_im(z.re, z.im)
    });
    let eig = mt
        .as_mat()?
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("fixed-point eigensolve failed: {e:?}")))?;
    let w: Vec<f64> = (0..k).map(|i| eig.S()[i].re()).collect();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    if !(wmax > 0.0) {
        return Err(Error::Numerical("transfer fixed point is not positive".into()));
    }
    let keep: Vec<usize> = (0..k).filter(|&i| w[i] > wmax * 1e-15).collect();
    let u = eig.U();
    let vecs = DenseTensor::from_fn(vec![k, keep.len()], |i| u[(i[0], keep[i[1]])]);
    Ok((vecs, keep.iter().map(|&i| w[i]).collect()))
}

/// Brings the two-site cell M1 M2 (bond k → k) to right-canonical form with Schmidt values.
/// Returns (B1, B2, Λ left of B1, Λ left of B2).
fn canonicalize_cell<T: Scalar>(
    m1: &DenseTensor<T>,
    m2: &DenseTensor<T>,
) -> Result<(DenseTensor<T>, DenseTensor<T>, Vec<f64>, Vec<f64>)> {
    let d = m1.shape()[1];
    let k = m1.shape()[0];
    if m2.shape()[2] != k {
        return Err(Error::dim("unit cell does not close on itself"));
    }
    let cell = contract(m1, m2, &[(2, 0)])?.reshape(vec![k, d * d, k])?;
    let cc = to_c64(&cell);
    let (eta, r) = fixed_point(|x| transfer_right(x, &cc, None).expect("square cell"), k)?;
    let (_, l) = fixed_point(|x| transfer_left(x, &cc, None).expect("square cell"), k)?;
    if eta.im.abs() > 1e-8 * eta.norm() || !(eta.re > 0.0) {
        return Err(Error::Numerical(format!("dominant transfer eigenvalue {eta} is not positive")));
    }
    // R = Y Y†, L = X† X
    let (ur, wr) = positive_part::<T>(&r)?;
    let (ul, wl) = positive_part::<T>(&l)?;
    let sr: Vec<f64> = wr.iter().map(|x| x.sqrt()).collect();
    let sl: Vec<f64> = wl.iter().map(|x| x.sqrt()).collect();
    let y = DenseTensor::from_fn(ur.shape().to_vec(), |i| ur.get(i) * T::from_real(sr[i[1]]));
    let y_pinv = DenseTensor::from_fn(vec![sr.len(), k], |i| ur.get(&[i[1], i[0]]).conj() * T::from_real(1.0 / sr[i[0]]));
    let xl = DenseTensor::from_fn(vec![sl.len(), k], |i| ul.get(&[i[1], i[0]]).conj() * T::from_real(sl[i[0]]));
    let svd = svd_truncate(&xl.matmul(&y)?, &TruncationPolicy::new(usize::MAX, 1e-14, 0.0)?)?;
    let norm = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lam: Vec<f64> = svd.s.iter().map(|x| x / norm).collect();
    // G = V Y⁺, G⁻¹ = Y V†
    let g = svd.v.matmul(&y_pinv)?;
    let g_inv = y.matmul(&svd.v.adjoint()?)?;
    let scale = T::from_real(1.0 / eta.re.sqrt());
    let b = contract(&contract(&g, &cell, &[(1, 0)])?, &g_inv, &[(2, 0)])?.scale(scale);
    let kp = lam.len();
    // split Λ B into two right-canonical sites
    let theta = scale_bond(&b, &lam, true).reshape(vec![kp * d, d * kp])?;
    let split = svd_truncate(&theta, &TruncationPolicy::new(usize::MAX, 1e-14, 0.0)?)?;
    let k1 = split.s.len();
    let n1 = split.s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lam1: Vec<f64> = split.s.iter().map(|x| x / n1).collect();
    let b2 = split.v.reshape(vec![k1, d, kp])?;
    let b_full = b.reshape(vec![kp, d, d, kp])?;
    let b1 = contract(&b_full, &b2.conj(), &[(2, 1), (3, 2)])?;
    Ok((b1, b2, lam, lam1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_xyz_mpo, pauli, ChainLength, Pauli, XyzParams};
    use crate::mps::measure::{correlation_length, measure_local};
    use std::f64::consts::PI;

    #[test]
    fn ising_limit_energy_density() {
        // Jy = Jz = 0 is a classical Ising chain: e = −Jx/2.
        let h = build_xyz_mpo(&XyzParams::new(1.0, 0.0, 0.0), ChainLength::Infinite).unwrap();
        let s = DmrgSchedule::fixed(8).with_max_sweeps(60);
        let r = run_idmrg(&h, &s).unwrap();
        assert!((r.energy_density + 0.5).abs() < 1e-10, "{}", r.energy_density);
    }

    #[test]
    fn xx_chain_free_fermions() {
        // −½Σ(σxσx + σyσy) maps to free fermions with e = −2/π per site.
        let h = build_xyz_mpo(&XyzParams::new(1.0, 1.0, 0.0), ChainLength::Infinite).unwrap();
        let s = DmrgSchedule::fixed(32).with_max_sweeps(300).with_tolerances(1e-9, 1e-3);
        let mut run = IdmrgRun::new(&h, &s).unwrap();
        run.run().unwrap();
        let r = run.result().unwrap();
        assert!((r.energy_density + 2.0 / PI).abs() < 1e-4, "{}", r.energy_density);
        r.state.audit(1e-8).unwrap();
        let id = DenseTensor::eye(2);
        assert!((measure_local(&r.state, &id, 0).unwrap().re - 1.0).abs() < 1e-10);
        assert!(correlation_length(&r.state).unwrap() > 2.0);
    }

    #[test]
    fn ordered_xyz_needs_pinning() {
        let h = build_xyz_mpo(&XyzParams::new(1.0, 0.6, 0.2), ChainLength::Infinite).unwrap();
        let s = DmrgSchedule::fixed(24).with_max_sweeps(200);
        // Without a field the growing chain stays in the Z2 cat state.
        let cat = run_idmrg(&h, &s).unwrap();
        cat.state.audit(1e-10).unwrap();
        let sx = pauli(Pauli::X);
        match correlation_length(&cat.state) {
            Err(Error::NonInjective(_)) => {}
            other => assert!(other.unwrap() > 1e6),
        }

        let mut run = IdmrgRun::new(&h, &s).unwrap().with_pinning(&h, &sx, 0.1, 6).unwrap();
        assert!(run.run().unwrap());
        let r = run.result().unwrap();
        r.state.audit(1e-10).unwrap();
        assert!((r.energy_density - cat.energy_density).abs() < 1e-9);
        assert!(measure_local(&r.state, &sx, 1).unwrap().re > 0.5);
        let xi = correlation_length(&r.state).unwrap();
        assert!(xi > 0.1 && xi < 20.0, "{xi}");
    }
}
