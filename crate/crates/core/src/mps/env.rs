//! Environments and the effective two-site Hamiltonian.
//!
//! Left environments are stored as L[w, bra, ket], right environments as R[w, ket, bra].
//! MPO tensors enter only through their nonzero (w_left, w_right) blocks, applied as
//! small GEMMs on a [channel, rows, d] layout. Output channels are independent, which is
//! where the data-parallel backend splits the work.

use super::mpo::{MpoBlock, MpoOperator};
use crate::error::{Error, Result};
use crate::par::for_each_chunk_mut;
use crate::tensor::{gemm, gemm_into, DenseTensor, Scalar};

/// Nonzero blocks of one MPO site grouped by output channel, in both directions.
pub(crate) struct SiteBlocks<T> {
    pub wl: usize,
    pub wr: usize,
    pub d: usize,
    /// by_right[wr] = [(wl, mat[s_in][s_out])]
    by_right: Vec<Vec<(usize, Vec<T>)>>,
    /// by_left[wl] = [(wr, mat)]
    by_left: Vec<Vec<(usize, Vec<T>)>>,
}

impl<T: Scalar> SiteBlocks<T> {
    pub fn new(mpo: &MpoOperator<T>, site: usize) -> Self {
        let w = mpo.site(site);
        let (wl, d, wr) = (w.shape()[0], w.shape()[1], w.shape()[3]);
        let mut by_right = vec![Vec::new(); wr];
        let mut by_left = vec![Vec::new(); wl];
        for MpoBlock { wl: a, wr: b, mat } in mpo.blocks(site) {
            by_right[b].push((a, mat.clone()));
            by_left[a].push((b, mat));
        }
        Self { wl, wr, d, by_right, by_left }
    }

    /// x: [wl, rows, d_in] → [wr, rows, d_out].
    fn forward(&self, x: &[T], rows: usize) -> Vec<T> {
        apply(x, rows, self.d, self.wr, &self.by_right)
    }

    /// x: [wr, rows, d_in] → [wl, rows, d_out].
    fn backward(&self, x: &[T], rows: usize) -> Vec<T> {
        apply(x, rows, self.d, self.wl, &self.by_left)
    }
}

fn apply<T: Scalar>(x: &[T], rows: usize, d: usize, w_out: usize, groups: &[Vec<(usize, Vec<T>)>]) -> Vec<T> {
    let blk = rows * d;
    let mut out = vec![T::zero(); w_out * blk];
    for_each_chunk_mut(&mut out, blk, |oc, chunk| {
        for (k, (ic, mat)) in groups[oc].iter().enumerate() {
            gemm_into(rows, d, d, &x[ic * blk..(ic + 1) * blk], mat, chunk, k > 0);
        }
    });
    out
}

fn permute<T: Scalar>(data: &[T], shape: &[usize], perm: &[usize]) -> Vec<T> {
    crate::tensor::permute_raw(data, shape, perm)
}

/// Boundary environment with a single channel set to one.
pub(crate) fn boundary_env<T: Scalar>(w: usize, channel: usize) -> DenseTensor<T> {
    DenseTensor::from_fn(vec![w, 1, 1], |i| if i[0] == channel { T::one() } else { T::zero() })
}

/// L'[w2, b, b'] = Σ L[w, a, a'] conj(A[a, s, b]) W[w, s, s', w2] A[a', s', b'].
pub(crate) fn update_left<T: Scalar>(l: &DenseTensor<T>, a: &DenseTensor<T>, op: &SiteBlocks<T>) -> Result<DenseTensor<T>> {
    let (w, da) = (l.shape()[0], l.shape()[1]);
    let (da2, d, db) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    if l.shape()[2] != da2 || w != op.wl || d != op.d {
        return Err(Error::dim("update_left: incompatible shapes"));
    }
    let x = gemm(w * da, da2, d * db, l.data(), a.data()); // [w, a, s', b']
    let x = permute(&x, &[w, da, d, db], &[0, 1, 3, 2]); // [w, a, b', s']
    let y = op.forward(&x, da * db); // [w2, a, b', s]
    let y = permute(&y, &[op.wr, da, db, d], &[1, 3, 0, 2]); // [a, s, w2, b']
    let ah = a.clone().reshape(vec![da * d, db])?.adjoint()?; // [b, (a s)]
    let z = gemm(db, da * d, op.wr * db, ah.data(), &y); // [b, w2, b']
    let z = permute(&z, &[db, op.wr, db], &[1, 0, 2]);
    DenseTensor::new(vec![op.wr, db, db], z)
}

/// R'[w, a', a] = Σ A[a', s', b'] W[w, s, s', w2] conj(A[a, s, b]) R[w2, b', b].
pub(crate) fn update_right<T: Scalar>(r: &DenseTensor<T>, b: &DenseTensor<T>, op: &SiteBlocks<T>) -> Result<DenseTensor<T>> {
    let (w2, db) = (r.shape()[0], r.shape()[1]);
    let (da, d, db2) = (b.shape()[0], b.shape()[1], b.shape()[2]);
    if db2 != db || w2 != op.wr || d != op.d {
        return Err(Error::dim("update_right: incompatible shapes"));
    }
    let rp = permute(r.data(), &[w2, db, db], &[1, 0, 2]); // [b', w2, b]
    let x = gemm(da * d, db, w2 * db, b.data(), &rp); // [a', s', w2, b]
    let x = permute(&x, &[da, d, w2, db], &[2, 0, 3, 1]); // [w2, a', b, s']
    let y = op.backward(&x, da * db); // [w, a', b, s]
    let y = permute(&y, &[op.wl, da, db, d], &[0, 1, 3, 2]); // [w, a', s, b]
    let bh = b.clone().reshape(vec![da, d * db])?.adjoint()?; // [(s b), a]
    let z = gemm(op.wl * da, d * db, da, &y, bh.data());
    DenseTensor::new(vec![op.wl, da, da], z)
}

/// Effective two-site Hamiltonian acting on θ[a', s1', s2', b'] (flattened).
pub(crate) struct TwoSiteOperator<'a, T> {
    pub l: &'a DenseTensor<T>,
    pub r: &'a DenseTensor<T>,
    pub w1: &'a SiteBlocks<T>,
    pub w2: &'a SiteBlocks<T>,
}

impl<T: Scalar> TwoSiteOperator<'_, T> {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l.shape()[2], self.w1.d, self.r.shape()[1])
    }

    pub fn apply(&self, theta: &[T]) -> Vec<T> {
        let (da, d, db) = self.dims();
        let w = self.l.shape()[0];
        let x = gemm(w * da, da, d * d * db, self.l.data(), theta); // [w, a, s1', s2', b']
        let x = permute(&x, &[w, da, d, d, db], &[0, 1, 3, 4, 2]); // [w, a, s2', b', s1']
        let y = self.w1.forward(&x, da * d * db); // [w1, a, s2', b', s1]
        let wm = self.w1.wr;
        let y = permute(&y, &[wm, da, d, db, d], &[0, 1, 4, 3, 2]); // [w1, a, s1, b', s2']
        let z = self.w2.forward(&y, da * d * db); // [w2, a, s1, b', s2]
        let wr = self.w2.wr;
        let z = permute(&z, &[wr, da, d, db, d], &[1, 2, 4, 0, 3]); // [a, s1, s2, w2, b']
        gemm(da * d * d, wr * db, db, &z, self.r.data())
    }
}
