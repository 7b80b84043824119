use faer::Side;

use super::mpo::MpoOperator;
use super::state::MpsState;
use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Scalar};

/// Lowest eigenpair of a short open chain by dense diagonalization.
#[derive(Clone, Debug)]
pub struct ExactGroundState<T> {
    pub energy: f64,
    /// Gap to the first excited level, zero when degenerate.
    pub gap: f64,
    pub vector: Vec<T>,
    pub local_dim: usize,
}

pub fn exact_ground_state<T: Scalar>(h: &MpoOperator<T>) -> Result<ExactGroundState<T>> {
    let m = h.to_dense()?;
    let eig = m
        .as_mat()?
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigensolver failed: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let n = u.nrows();
    let energy = s[0].re();
    let gap = if n > 1 { s[1].re() - energy } else { 0.0 };
    Ok(ExactGroundState { energy, gap, vector: (0..n).map(|i| u[(i, 0)]).collect(), local_dim: h.local_dim() })
}

impl<T: Scalar> ExactGroundState<T> {
    /// ⟨op_site⟩ in the dense ground state.
    pub fn local(&self, op: &DenseTensor<T>, site: usize) -> Result<T> {
        self.product(&[(site, op)])
    }

    /// ⟨Π op_site⟩ over distinct sites.
    pub fn product(&self, ops: &[(usize, &DenseTensor<T>)]) -> Result<T> {
        let d = self.local_dim;
        let n = self.vector.len();
        let len = (n as f64).ln() / (d as f64).ln();
        let len = len.round() as usize;
        for (s, op) in ops {
            if *s >= len || op.shape() != [d, d] {
                return Err(Error::dim("operator or site does not fit the chain"));
            }
        }
        let mut acc = T::zero();
        for (idx, &c) in self.vector.iter().enumerate() {
            if c.modulus() == 0.0 {
                continue;
            }
            // ⟨ψ| ⊗op |ψ⟩ row by row: sum over output configurations reachable from idx
            let digits: Vec<usize> = (0..len).map(|k| (idx / d.pow((len - 1 - k) as u32)) % d).collect();
            let mut terms: Vec<(usize, T)> = vec![(0, T::one())];
            for k in 0..len {
                let mut next = Vec::new();
                let op = ops.iter().find(|(s, _)| *s == k).map(|(_, o)| *o);
                for (row, amp) in terms {
                    match op {
                        None => next.push((row * d + digits[k], amp)),
                        Some(o) => {
                            for out in 0..d {
                                let e = o.get(&[out, digits[k]]);
                                if e.modulus() != 0.0 {
                                    next.push((row * d + out, amp * e));
                                }
                            }
                        }
                    }
                }
                terms = next;
            }
            for (row, amp) in terms {
                acc += self.vector[row].conj() * amp * c;
            }
        }
        Ok(acc)
    }

    /// Overlap |⟨exact|ψ⟩|² with a finite MPS.
    pub fn fidelity(&self, state: &MpsState<T>) -> Result<f64> {
        let v = state.to_dense_vector()?;
        if v.len() != self.vector.len() {
            return Err(Error::dim("state and exact vector differ in size"));
        }
        let ov: T = self.vector.iter().zip(&v).map(|(a, b)| a.conj() * *b).sum();
        let nv: f64 = v.iter().map(|x| x.abs_sq()).sum();
        Ok(ov.abs_sq() / nv)
    }
}
