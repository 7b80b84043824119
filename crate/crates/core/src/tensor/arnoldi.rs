use faer::Mat;

use super::C64;
use crate::error::{Error, Result};

/// Ritz pair of a non-Hermitian map.
#[derive(Clone, Debug)]
pub struct ArnoldiPair {
    pub value: C64,
    pub vector: Vec<C64>,
    /// Ritz residual estimate |h_{m+1,m}|·|y_m|.
    pub residual: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest-modulus eigenpairs of a general linear map by explicitly restarted Arnoldi.
///
/// The Krylov space grows up to `max_krylov`; convergence is checked every few steps and
/// each restart starts from the sum of the wanted Ritz vectors.
pub fn arnoldi_largest(
    mut apply: impl FnMut(&[C64]) -> Vec<C64>,
    v0: &[C64],
    nev: usize,
    tol: f64,
    max_krylov: usize,
    max_restarts: usize,
) -> Result<Vec<ArnoldiPair>> {
    let n = v0.len();
    let nrm = norm(v0);
    if n == 0 || nev == 0 || !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Contract("Arnoldi needs a nonzero finite start and nev >= 1".into()));
    }
    let nev = nev.min(n);
    let kmax = max_krylov.max(nev + 2).min(n);
    let mut start: Vec<C64> = v0.iter().map(|x| x / nrm).collect();
    let mut last_estimate = 0.0;
    for _ in 0..=max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut h = Mat::<C64>::zeros(kmax + 1, kmax);
        let mut j = 0;
        loop {
            let mut w = apply(&basis[j]);
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[(i, j)] += c;
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = norm(&w);
            h[(j + 1, j)] = C64::new(beta, 0.0);
            let m = j + 1;
            let scale = (0..m).map(|i| h[(i, i)].norm()).fold(beta, f64::max).max(1e-300);
            let breakdown = beta <= 1e-13 * scale;
            let full = m == kmax;
            if breakdown || full || (m >= nev && m % 4 == 0) {
                let hm = h.as_ref().submatrix(0, 0, m, m).to_owned();
                let eig = hm
                    .eigen()
                    .map_err(|e| Error::Numerical(format!("Hessenberg eigensolve failed: {e:?}")))?;
                let mut order: Vec<usize> = (0..m).collect();
                let vals: Vec<C64> = (0..m).map(|i| eig.S()[i]).collect();
                order.sort_by(|&a, &b| vals[b].norm().partial_cmp(&vals[a].norm()).unwrap());
                let lead = vals[order[0]].norm();
                let k = nev.min(m);
                let mut pairs = Vec::with_capacity(k);
                let mut all_ok = true;
                for &idx in &order[..k] {
                    let y: Vec<C64> = (0..m).map(|i| eig.U()[(i, idx)]).collect();
                    let ynorm = norm(&y);
                    let res = beta * y[m - 1].norm() / ynorm;
                    let lam = vals[idx];
                    let target = tol * lam.norm().max(1e-8 * lead).max(1e-300);
                    if !(breakdown || res <= target) {
                        all_ok = false;
                    }
                    pairs.push((lam, y, ynorm, res));
                }
                last_estimate = lead;
                if all_ok && (k == nev || breakdown) {
                    return Ok(pairs
                        .into_iter()
                        .map(|(lam, y, ynorm, res)| {
                            let mut v = vec![C64::new(0.0, 0.0); n];
                            for (b, c) in basis.iter().zip(&y) {
                                v.iter_mut().zip(b).for_each(|(x, bi)| *x += c / ynorm * bi);
                            }
                            let vn = norm(&v);
                            v.iter_mut().for_each(|x| *x /= vn);
                            ArnoldiPair { value: lam, vector: v, residual: res }
                        })
                        .collect());
                }
                if breakdown || full {
                    // restart from the sum of the wanted Ritz vectors
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    for (_, y, ynorm, _) in &pairs {
                        for (b, c) in basis.iter().zip(y) {
                            v.iter_mut().zip(b).for_each(|(x, bi)| *x += c / ynorm * bi);
                        }
                    }
                    let vn = norm(&v);
                    if !(vn > 1e-12) {
                        v = basis[0].clone();
                    } else {
                        v.iter_mut().for_each(|x| *x /= vn);
                    }
                    start = v;
                    break;
                }
            }
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
            j += 1;
        }
    }
    Err(Error::Convergence {
        message: format!("Arnoldi did not converge {nev} eigenpairs after {max_restarts} restarts"),
        estimate: last_estimate,
        error_bound: f64::NAN,
        history: vec![],
    })
}
