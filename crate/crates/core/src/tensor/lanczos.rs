use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Scalar;
use crate::error::{Error, Result};

const KRYLOV_MAX: usize = 40;
const MAX_INJECTIONS: usize = 3;

/// Outcome of a Lanczos solve, returned even when the tolerance was not met.
#[derive(Clone, Debug)]
pub struct LanczosReport<T> {
    pub e0: f64,
    pub v: Vec<T>,
    /// True residual ‖Hv − e0·v‖.
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

/// Lowest eigenpair of a Hermitian map. Errors if `tol` is not reached within `max_iter`
/// applications of `apply_h`.
pub fn lanczos_lowest<T: Scalar>(
    apply_h: impl FnMut(&[T]) -> Vec<T>,
    v0: &[T],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<T>)> {
    let rep = lanczos_lowest_report(apply_h, v0, tol, max_iter)?;
    if rep.converged {
        Ok((rep.e0, rep.v))
    } else {
        Err(Error::Convergence {
            message: format!("Lanczos did not reach tolerance {tol:e} in {max_iter} matvecs"),
            estimate: rep.e0,
            error_bound: rep.residual,
            history: vec![],
        })
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| x.conj() * *y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt()
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

fn orthogonalize<T: Scalar>(w: &mut [T], basis: &[Vec<T>]) {
    // Two passes of classical Gram-Schmidt are enough in double precision.
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            axpy(w, -c, b);
        }
    }
}

fn lowest_of_tridiagonal(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("tridiagonal eigensolve failed: {e:?}")))?;
    let y = (0..m).map(|i| eig.U()[(i, 0)]).collect();
    Ok((eig.S()[0], y))
}

/// Restarted Lanczos with full reorthogonalization.
pub fn lanczos_lowest_report<T: Scalar>(
    mut apply_h: impl FnMut(&[T]) -> Vec<T>,
    v0: &[T],
    tol: f64,
    max_iter: usize,
) -> Result<LanczosReport<T>> {
    let n = v0.len();
    let nrm = norm(v0);
    if n == 0 || !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Contract("Lanczos start vector must be nonzero and finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_0000 ^ n as u64);
    let mut x: Vec<T> = v0.iter().map(|&c| c * T::from_real(1.0 / nrm)).collect();
    let mut hx = apply_h(&x);
    let mut matvecs = 1usize;
    let mut injections = 0usize;
    let kdim = n.min(KRYLOV_MAX);

    loop {
        let mut basis: Vec<Vec<T>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = hx.clone();
        let mut ritz: (f64, Vec<f64>);
        loop {
            let j = basis.len() - 1;
            let a = dot(&basis[j], &w);
            if a.im().abs() > 1e-8 * (1.0 + a.re().abs()) {
                return Err(Error::Contract(format!(
                    "map is not Hermitian: <v|Hv> has imaginary part {:e}",
                    a.im()
                )));
            }
            alpha.push(a.re());
            axpy(&mut w, T::from_real(-a.re()), &basis[j]);
            if j > 0 {
                axpy(&mut w, T::from_real(-beta[j - 1]), &basis[j - 1]);
            }
            orthogonalize(&mut w, &basis);
            ritz = lowest_of_tridiagonal(&alpha, &beta)?;
            let b = norm(&w);
            let scale = ritz.0.abs().max(1.0);
            let ritz_res = b * ritz.1[j].abs();
            if basis.len() == n || basis.len() >= kdim || matvecs >= max_iter {
                break;
            }
            if ritz_res <= 0.1 * tol * scale && basis.len() > 1 {
                break;
            }
            if b <= 1e-13 * scale {
                // Invariant subspace: extend with a fresh random direction.
                if injections >= MAX_INJECTIONS {
                    return Err(Error::Numerical(format!(
                        "Lanczos breakdown persisted after {MAX_INJECTIONS} restarts"
                    )));
                }
                injections += 1;
                let mut r: Vec<T> = (0..n)
                    .map(|_| T::from_re_im(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                orthogonalize(&mut r, &basis);
                let rn = norm(&r);
                if rn <= 1e-13 {
                    break;
                }
                r.iter_mut().for_each(|c| *c = *c * T::from_real(1.0 / rn));
                beta.push(0.0);
                basis.push(r);
            } else {
                w.iter_mut().for_each(|c| *c = *c * T::from_real(1.0 / b));
                beta.push(b);
                basis.push(w);
            }
            w = apply_h(basis.last().unwrap());
            matvecs += 1;
        }
        let (_, y) = ritz;
        let mut nx = vec![T::zero(); n];
        for (bi, &yi) in basis.iter().zip(&y) {
            axpy(&mut nx, T::from_real(yi), bi);
        }
        let nn = norm(&nx);
        nx.iter_mut().for_each(|c| *c = *c * T::from_real(1.0 / nn));
        x = nx;
        hx = apply_h(&x);
        matvecs += 1;
        let e = dot(&x, &hx).re();
        let mut r = hx.clone();
        axpy(&mut r, T::from_real(-e), &x);
        let residual = norm(&r);
        let target = tol * e.abs().max(1.0);
        let spans_all = basis.len() == n;
        if residual <= target || matvecs >= max_iter || (spans_all && residual <= 1e3 * target) {
            return Ok(LanczosReport {
                e0: e,
                v: x,
                residual,
                matvecs,
                converged: residual <= target || spans_all,
            });
        }
    }
}
