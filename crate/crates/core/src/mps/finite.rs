use serde::{Deserialize, Serialize};

use super::env::{boundary_env, update_left, update_right, SiteBlocks, TwoSiteOperator};
use super::mpo::{MpoBoundary, MpoOperator};
use super::schedule::{DmrgSchedule, InitialState};
use super::state::MpsState;
use crate::error::{Error, Result};
use crate::tensor::{contract, lanczos_lowest_report, svd_truncate, DenseTensor, Scalar, TruncationPolicy};

/// Outcome of a finite DMRG run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DmrgResult<T> {
    /// ⟨ψ|H|ψ⟩ of the returned (normalized) state.
    pub energy: f64,
    pub state: MpsState<T>,
    pub sweeps: usize,
    /// Lowest local eigenvalue at the end of each sweep.
    pub energy_history: Vec<f64>,
    /// Largest discarded weight of the final sweep.
    pub max_discarded_weight: f64,
    pub converged: bool,
}

fn entropy(s: &[f64]) -> f64 {
    s.iter().filter(|&&x| x > 0.0).map(|&x| -x * x * (x * x).ln()).sum()
}

/// Two-site finite DMRG. Errors with the energy history if `max_sweeps` is exhausted.
pub fn run_finite_dmrg<T: Scalar>(h: &MpoOperator<T>, length: usize, schedule: &DmrgSchedule) -> Result<DmrgResult<T>> {
    let r = run_finite_dmrg_report(h, length, schedule)?;
    if r.converged {
        Ok(r)
    } else {
        let n = r.energy_history.len();
        let delta = if n >= 2 { (r.energy_history[n - 1] - r.energy_history[n - 2]).abs() } else { f64::NAN };
        Err(Error::Convergence {
            message: format!("finite DMRG not converged after {} sweeps", r.sweeps),
            estimate: r.energy,
            error_bound: delta,
            history: r.energy_history,
        })
    }
}

/// Like [`run_finite_dmrg`] but returns the last state with `converged = false` instead of
/// an error.
pub fn run_finite_dmrg_report<T: Scalar>(
    h: &MpoOperator<T>,
    length: usize,
    schedule: &DmrgSchedule,
) -> Result<DmrgResult<T>> {
    schedule.validate()?;
    if length < 2 {
        return Err(Error::domain("finite DMRG needs at least two sites"));
    }
    let mpo = match h.boundary() {
        MpoBoundary::Open if h.len() == length => h.clone(),
        MpoBoundary::Open => {
            return Err(Error::dim(format!("MPO has {} sites, asked for {length}", h.len())));
        }
        MpoBoundary::Infinite => h.window(length)?,
    };
    let d = mpo.local_dim();
    let blocks: Vec<SiteBlocks<T>> = (0..length).map(|i| SiteBlocks::new(&mpo, i)).collect();
    let init = match schedule.initial {
        InitialState::Random => MpsState::random(length, d, schedule.params(0).chi, schedule.rng_seed)?,
        InitialState::Product(s) => MpsState::product(&vec![s; length], d)?,
    };
    let (mut ms, _) = init.into_parts();

    let mut lenv: Vec<DenseTensor<T>> = vec![boundary_env(1, 0); length + 1];
    let mut renv: Vec<DenseTensor<T>> = vec![boundary_env(1, 0); length + 1];
    for i in (1..length).rev() {
        renv[i] = update_right(&renv[i + 1], &ms[i], &blocks[i])?;
    }

    let mut history = Vec::new();
    let mut prev_entropies: Option<Vec<f64>> = None;
    let mut converged = false;
    let mut sweeps = 0;
    let mut max_dw = 0.0;
    while sweeps < schedule.max_sweeps {
        let p = schedule.params(sweeps);
        let policy = TruncationPolicy::new(p.chi, p.sv_cutoff, 0.0)?;
        max_dw = 0.0f64;
        let mut e_last = f64::NAN;
        let mut entropies = vec![0.0; length + 1];
        // left to right, then right to left
        let order: Vec<(usize, bool)> =
            (0..length - 1).map(|i| (i, true)).chain((0..length - 1).rev().map(|i| (i, false))).collect();
        for (i, to_right) in order {
            let theta = contract(&ms[i], &ms[i + 1], &[(2, 0)])?;
            let shape = theta.shape().to_vec();
            let op = TwoSiteOperator { l: &lenv[i], r: &renv[i + 2], w1: &blocks[i], w2: &blocks[i + 1] };
            let rep = lanczos_lowest_report(|v| op.apply(v), theta.data(), p.lanczos_tol, schedule.lanczos_max_iter)?;
            e_last = rep.e0;
            let (a, b) = (shape[0], shape[3]);
            let m = DenseTensor::new(vec![a * d, d * b], rep.v)?;
            let svd = svd_truncate(&m, &policy)?;
            max_dw = max_dw.max(svd.discarded_weight);
            let k = svd.s.len();
            let nrm: f64 = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
            let s: Vec<f64> = svd.s.iter().map(|x| x / nrm).collect();
            entropies[i + 1] = entropy(&s);
            if to_right {
                ms[i] = svd.u.reshape(vec![a, d, k])?;
                ms[i + 1] = DenseTensor::from_fn(vec![k, d * b], |x| svd.v.get(x) * T::from_real(s[x[0]]))
                    .reshape(vec![k, d, b])?;
                lenv[i + 1] = update_left(&lenv[i], &ms[i], &blocks[i])?;
            } else {
                ms[i] = DenseTensor::from_fn(vec![a * d, k], |x| svd.u.get(x) * T::from_real(s[x[1]]))
                    .reshape(vec![a, d, k])?;
                ms[i + 1] = svd.v.reshape(vec![k, d, b])?;
                renv[i + 1] = update_right(&renv[i + 2], &ms[i + 1], &blocks[i + 1])?;
            }
        }
        sweeps += 1;
        let de = history.last().map(|e: &f64| (e - e_last).abs());
        history.push(e_last);
        let ds = prev_entropies
            .as_ref()
            .map(|pe: &Vec<f64>| pe.iter().zip(&entropies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        prev_entropies = Some(entropies);
        if let (Some(de), Some(ds)) = (de, ds) {
            if schedule.at_final_stage(sweeps - 1) && de <= schedule.energy_tol && ds <= schedule.entropy_tol {
                converged = true;
                break;
            }
        }
    }

    let mut state = MpsState::new(ms, vec![vec![1.0]; length + 1], super::CanonicalForm::General, d)?;
    state.canonicalize_right()?;
    let energy = expectation_energy(&mpo, &state)?;
    Ok(DmrgResult { energy, state, sweeps, energy_history: history, max_discarded_weight: max_dw, converged })
}

/// ⟨ψ|H|ψ⟩/⟨ψ|ψ⟩ for a finite state and open MPO of the same length.
pub fn expectation_energy<T: Scalar>(h: &MpoOperator<T>, state: &MpsState<T>) -> Result<f64> {
    if h.boundary() != MpoBoundary::Open || h.len() != state.len() || state.is_infinite() {
        return Err(Error::dim("energy needs an open MPO and finite state of equal length"));
    }
    let mut l = boundary_env::<T>(1, 0);
    for i in 0..state.len() {
        l = update_left(&l, state.site(i), &SiteBlocks::new(h, i))?;
    }
    let n2 = state.norm()?.powi(2);
    Ok(l.data()[0].re() / n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_qec_mpo, build_xyz_mpo, charge_operator, pauli, vertex_operator_matrix, ChainLength, Pauli, QecParams, XyzParams};
    use crate::mps::ed::exact_ground_state;
    use crate::mps::measure::measure_local;

    fn sched(chi: usize) -> DmrgSchedule {
        DmrgSchedule::fixed(chi).with_max_sweeps(30)
    }

    #[test]
    fn xy_dimer() {
        let h = build_xyz_mpo(&XyzParams::new(1.0, 1.0, 0.0), ChainLength::Finite(2)).unwrap();
        let r = run_finite_dmrg(&h, 2, &sched(4)).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-12);
        r.state.audit(1e-10).unwrap();
    }

    #[test]
    fn xyz_eight_sites_matches_ed() {
        let h = build_xyz_mpo(&XyzParams::new(1.0, 0.999937, 0.981), ChainLength::Finite(8)).unwrap();
        let ed = exact_ground_state(&h).unwrap();
        let r = run_finite_dmrg(&h, 8, &sched(16)).unwrap();
        assert!(((r.energy - ed.energy) / ed.energy).abs() < 1e-8, "{} vs {}", r.energy, ed.energy);
        assert!(r.energy >= ed.energy - 1e-10);
        // σ⁺σ⁻ on the middle site
        let pm = pauli(Pauli::Plus).matmul(&pauli(Pauli::Minus)).unwrap();
        let a = measure_local(&r.state, &pm, 4).unwrap().re;
        let b = ed.local(&pm, 4).unwrap();
        assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn qec_four_sites_matches_ed() {
        let p = QecParams { n_max: 1, e_j: 1.55, e_j0: 0.3, ..QecParams::default() };
        let h = build_qec_mpo(&p, ChainLength::Finite(4)).unwrap();
        let ed = exact_ground_state(&h).unwrap();
        let r = run_finite_dmrg(&h, 4, &sched(9)).unwrap();
        assert!(((r.energy - ed.energy) / ed.energy).abs() < 1e-8);
        let s = vertex_operator_matrix(1).unwrap().adjoint().unwrap();
        for site in 0..4 {
            let a = measure_local(&r.state, &s, site).unwrap().re;
            let b = ed.local(&s, site).unwrap();
            assert!((a - b).abs() < 1e-8 * b.abs().max(1e-3), "site {site}: {a} vs {b}");
        }
        let n = charge_operator(1).unwrap();
        assert!(measure_local(&r.state, &n, 1).unwrap().norm() < 1e-8);
    }

    #[test]
    fn sweep_energies_do_not_increase() {
        let h = build_xyz_mpo(&XyzParams::new(1.0, 0.8, 0.3), ChainLength::Finite(10)).unwrap();
        let s = DmrgSchedule::ramp(&[4, 8, 16]).with_max_sweeps(12);
        let r = run_finite_dmrg_report(&h, 10, &s).unwrap();
        for w in r.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", r.energy_history);
        }
    }
}
