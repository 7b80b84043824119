use serde::{Deserialize, Serialize};

use super::{DenseTensor, Scalar};
use crate::error::{Error, Result};

/// How aggressively a bond is cut after an SVD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Bond dimension χ.
    pub max_bond: usize,
    /// Drop singular values below `sv_cutoff · s_0`.
    pub sv_cutoff: f64,
    /// Keep the smallest number of values whose discarded weight stays below this.
    pub max_discarded_weight: f64,
}

impl TruncationPolicy {
    pub fn new(max_bond: usize, sv_cutoff: f64, max_discarded_weight: f64) -> Result<Self> {
        let p = Self { max_bond, sv_cutoff, max_discarded_weight };
        p.validate()?;
        Ok(p)
    }

    /// Only the bond dimension is binding.
    pub fn chi(max_bond: usize) -> Self {
        Self { max_bond, sv_cutoff: 0.0, max_discarded_weight: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond == 0 {
            return Err(Error::domain("max_bond must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.sv_cutoff) {
            return Err(Error::domain(format!("sv_cutoff {} outside [0,1)", self.sv_cutoff)));
        }
        if !(self.max_discarded_weight >= 0.0) {
            return Err(Error::domain("max_discarded_weight must be non-negative"));
        }
        Ok(())
    }

    /// Number of values to keep from a non-increasing spectrum.
    pub fn kept(&self, s: &[f64]) -> usize {
        if s.is_empty() {
            return 0;
        }
        let s0 = s[0];
        if !(s0 > 0.0) {
            return 1;
        }
        let mut keep = s.len().min(self.max_bond);
        {
            let above = s.iter().take_while(|&&x| x >= self.sv_cutoff * s0).count();
            keep = keep.min(above);
            if self.max_discarded_weight > 0.0 {
                let total: f64 = s.iter().map(|x| x * x).sum();
                // Smallest n with tail weight ≤ threshold.
                let mut tail = total;
                let mut n = 0;
                while n < s.len() && tail / total > self.max_discarded_weight {
                    tail -= s[n] * s[n];
                    n += 1;
                }
                keep = keep.min(n.max(1));
            }
        }
        keep.max(1)
    }
}

/// `m ≈ u · diag(s) · v` with `u` having orthonormal columns and `v` orthonormal rows.
#[derive(Clone, Debug)]
pub struct SvdTruncation<T> {
    pub u: DenseTensor<T>,
    pub s: Vec<f64>,
    pub v: DenseTensor<T>,
    /// Σ discarded s² / Σ all s².
    pub discarded_weight: f64,
    /// The full spectrum before truncation.
    pub full_spectrum: Vec<f64>,
}

pub fn svd_truncate<T: Scalar>(
    m: &DenseTensor<T>,
    policy: &TruncationPolicy,
) -> Result<SvdTruncation<T>> {
    policy.validate()?;
    let mat = m.as_mat()?;
    let (rows, cols) = (mat.nrows(), mat.ncols());
    let svd = mat.thin_svd().map_err(|e| {
        let fro = m.norm();
        Error::Numerical(format!(
            "SVD did not converge for a {rows}x{cols} matrix (Frobenius norm {fro:e}): {e:?}"
        ))
    })?;
    let (u, sd, v) = (svd.U(), svd.S(), svd.V());
    let r = rows.min(cols);
    let s_all: Vec<f64> = (0..r).map(|i| sd[i].re()).collect();
    // faer sorts already; a stable re-sort keeps earlier indices first on exact ties.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| s_all[b].partial_cmp(&s_all[a]).unwrap_or(std::cmp::Ordering::Equal));
    let s_sorted: Vec<f64> = order.iter().map(|&i| s_all[i]).collect();
    let keep = policy.kept(&s_sorted);
    let total: f64 = s_sorted.iter().map(|x| x * x).sum();
    let disc: f64 = s_sorted[keep..].iter().map(|x| x * x).sum();
    let discarded_weight = if total > 0.0 { disc / total } else { 0.0 };
    let cols_kept = &order[..keep];
    let u_out = DenseTensor::from_fn(vec![rows, keep], |i| u[(i[0], cols_kept[i[1]])]);
    let v_out = DenseTensor::from_fn(vec![keep, cols], |i| v[(i[1], cols_kept[i[0]])].conj());
    if !u_out.all_finite() || !v_out.all_finite() {
        return Err(Error::Numerical("SVD produced non-finite factors".into()));
    }
    Ok(SvdTruncation {
        u: u_out,
        s: s_sorted[..keep].to_vec(),
        v: v_out,
        discarded_weight,
        full_spectrum: s_sorted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;
    use approx::assert_relative_eq;

    fn reconstruct<T: Scalar>(t: &SvdTruncation<T>) -> DenseTensor<T> {
        let k = t.s.len();
        let us = DenseTensor::from_fn(vec![t.u.shape()[0], k], |i| {
            t.u.get(i) * T::from_real(t.s[i[1]])
        });
        us.matmul(&t.v).unwrap()
    }

    #[test]
    fn diagonal_truncation() {
        let m = DenseTensor::<f64>::from_fn(vec![3, 3], |i| {
            if i[0] == i[1] { [3.0, 2.0, 1.0][i[0]] } else { 0.0 }
        });
        let t = svd_truncate(&m, &TruncationPolicy::chi(2)).unwrap();
        assert_eq!(t.s.len(), 2);
        assert_relative_eq!(t.s[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(t.s[1], 2.0, epsilon = 1e-14);
        assert_relative_eq!(t.discarded_weight, 1.0 / 14.0, epsilon = 1e-14);
    }

    #[test]
    fn lossless_reconstruction_complex() {
        let m = DenseTensor::from_fn(vec![5, 7], |i| {
            C64::new(((i[0] * 7 + i[1]) as f64).sin(), ((i[0] + 3 * i[1]) as f64).cos())
        });
        let t = svd_truncate(&m, &TruncationPolicy::chi(10)).unwrap();
        let r = reconstruct(&t);
        let diff: f64 = r.data().iter().zip(m.data()).map(|(a, b)| (*a - *b).norm_sqr()).sum();
        assert!(diff.sqrt() <= 1e-10 * m.norm());
        // isometries
        let uu = t.u.adjoint().unwrap().matmul(&t.u).unwrap();
        let vv = t.v.matmul(&t.v.adjoint().unwrap()).unwrap();
        for (g, k) in [(uu, t.s.len()), (vv, t.s.len())] {
            for a in 0..k {
                for b in 0..k {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((g.get(&[a, b]) - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_one_has_no_discarded_weight() {
        let m = DenseTensor::<f64>::from_fn(vec![4, 3], |i| (i[0] as f64 + 1.0) * (2.0 - i[1] as f64));
        let t = svd_truncate(&m, &TruncationPolicy::chi(1)).unwrap();
        assert!(t.discarded_weight < 1e-28);
    }

    #[test]
    fn cutoff_and_weight_rules() {
        let p = TruncationPolicy::new(10, 0.15, 0.0).unwrap();
        assert_eq!(p.kept(&[1.0, 0.5, 0.2, 0.1]), 3);
        let p = TruncationPolicy::new(10, 0.0, 0.05).unwrap();
        // weights 1, .25, .04, .01 of 1.30: tail after 2 kept = .05/1.3 < .05
        assert_eq!(p.kept(&[1.0, 0.5, 0.2, 0.1]), 2);
        assert_eq!(TruncationPolicy::chi(3).kept(&[0.0, 0.0]), 1);
        assert!(TruncationPolicy::new(0, 0.0, 0.0).is_err());
        assert!(TruncationPolicy::new(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn ties_keep_earlier_index() {
        let m = DenseTensor::<f64>::from_fn(vec![3, 3], |i| if i[0] == i[1] { 1.0 } else { 0.0 });
        let a = svd_truncate(&m, &TruncationPolicy::chi(2)).unwrap();
        let b = svd_truncate(&m, &TruncationPolicy::chi(2)).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.s, vec![1.0, 1.0]);
    }
}
