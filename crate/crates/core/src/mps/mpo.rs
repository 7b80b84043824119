use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{contract, DenseTensor, Scalar, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MpoBoundary {
    /// Finite chain; first tensor has left extent 1 and last has right extent 1.
    Open,
    /// Translation-invariant unit cell; boundaries are the first and last channel.
    Infinite,
}

/// Matrix-product operator with site tensors W[left, phys_out, phys_in, right].
///
/// Channel convention for the bulk tensors built here: channel 0 carries the identity
/// to the left of every term, the last channel carries the identity after a term is
/// complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MpoOperator<T> {
    site_tensors: Vec<DenseTensor<T>>,
    local_dim: usize,
    boundary: MpoBoundary,
}

/// A nonzero (left, right) channel block stored as a d×d matrix indexed [s_in][s_out].
#[derive(Clone, Debug)]
pub(crate) struct MpoBlock<T> {
    pub wl: usize,
    pub wr: usize,
    pub mat: Vec<T>,
}

impl<T: Scalar> MpoOperator<T> {
    fn check_tensor(w: &DenseTensor<T>, d: usize) -> Result<()> {
        if w.rank() != 4 || w.shape()[1] != d || w.shape()[2] != d {
            return Err(Error::dim(format!(
                "MPO tensor shape {:?} incompatible with local dimension {d}",
                w.shape()
            )));
        }
        Ok(())
    }

    pub fn new_open(site_tensors: Vec<DenseTensor<T>>, local_dim: usize) -> Result<Self> {
        if site_tensors.is_empty() {
            return Err(Error::dim("empty MPO"));
        }
        for w in &site_tensors {
            Self::check_tensor(w, local_dim)?;
        }
        if site_tensors[0].shape()[0] != 1 || site_tensors.last().unwrap().shape()[3] != 1 {
            return Err(Error::dim("open MPO needs unit outer bonds"));
        }
        for pair in site_tensors.windows(2) {
            if pair[0].shape()[3] != pair[1].shape()[0] {
                return Err(Error::dim("MPO bond extents do not chain"));
            }
        }
        Ok(Self { site_tensors, local_dim, boundary: MpoBoundary::Open })
    }

    pub fn new_infinite(cell: Vec<DenseTensor<T>>, local_dim: usize) -> Result<Self> {
        if cell.is_empty() {
            return Err(Error::dim("empty MPO unit cell"));
        }
        for w in &cell {
            Self::check_tensor(w, local_dim)?;
        }
        let n = cell.len();
        for i in 0..n {
            if cell[i].shape()[3] != cell[(i + 1) % n].shape()[0] {
                return Err(Error::dim("MPO unit-cell bond extents do not chain periodically"));
            }
        }
        Ok(Self { site_tensors: cell, local_dim, boundary: MpoBoundary::Infinite })
    }

    /// Open chain of `length` sites cut from a single bulk tensor.
    pub fn open_from_bulk(bulk: &DenseTensor<T>, length: usize) -> Result<Self> {
        Self::check_tensor(bulk, bulk.shape()[1])?;
        if length == 0 {
            return Err(Error::dim("chain length must be positive"));
        }
        let w = bulk.shape()[0];
        let d = bulk.shape()[1];
        let first = slice_left(bulk, 0);
        let last = slice_right(bulk, w - 1);
        let tensors = match length {
            1 => vec![slice_right(&first, w - 1)],
            _ => {
                let mut v = vec![first];
                v.extend((1..length - 1).map(|_| bulk.clone()));
                v.push(last);
                v
            }
        };
        Self::new_open(tensors, d)
    }

    pub fn infinite_from_bulk(bulk: &DenseTensor<T>, cell: usize) -> Result<Self> {
        let d = bulk.shape()[1];
        Self::new_infinite(vec![bulk.clone(); cell.max(1)], d)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn boundary(&self) -> MpoBoundary {
        self.boundary
    }

    /// Number of stored tensors (chain length, or unit-cell length).
    pub fn len(&self) -> usize {
        self.site_tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_tensors.is_empty()
    }

    /// Tensor at site `i`; infinite operators wrap around the unit cell.
    pub fn site(&self, i: usize) -> &DenseTensor<T> {
        &self.site_tensors[i % self.site_tensors.len()]
    }

    pub fn site_tensors(&self) -> &[DenseTensor<T>] {
        &self.site_tensors
    }

    pub fn max_bond(&self) -> usize {
        self.site_tensors.iter().map(|w| w.shape()[0].max(w.shape()[3])).max().unwrap_or(1)
    }

    /// Finite open window of an infinite MPO, or the operator itself if already open.
    pub fn window(&self, length: usize) -> Result<Self> {
        match self.boundary {
            MpoBoundary::Open => Ok(self.clone()),
            MpoBoundary::Infinite => {
                let mut tensors: Vec<DenseTensor<T>> =
                    (0..length).map(|i| self.site(i).clone()).collect();
                let last_w = tensors[length - 1].shape()[3];
                tensors[0] = slice_left(&tensors[0], 0);
                tensors[length - 1] = slice_right(&tensors[length - 1], last_w - 1);
                Self::new_open(tensors, self.local_dim)
            }
        }
    }

    /// Adds `op` to the on-site term of every bulk tensor of an infinite operator.
    /// Relies on the channel convention of [`nearest_neighbour_bulk`].
    pub fn with_onsite(&self, op: &DenseTensor<T>) -> Result<Self> {
        if self.boundary != MpoBoundary::Infinite {
            return Err(Error::Contract("with_onsite expects an infinite operator".into()));
        }
        let d = self.local_dim;
        if op.shape() != [d, d] {
            return Err(Error::dim("on-site operator must be d x d"));
        }
        let tensors = self
            .site_tensors
            .iter()
            .map(|w| {
                let last = w.shape()[3] - 1;
                let mut w = w.clone();
                for so in 0..d {
                    for si in 0..d {
                        let v = w.get(&[0, so, si, last]) + op.get(&[so, si]);
                        w.set(&[0, so, si, last], v);
                    }
                }
                w
            })
            .collect();
        Self::new_infinite(tensors, d)
    }

    /// Dense d^L × d^L matrix (open operators only; keep L small).
    pub fn to_dense(&self) -> Result<DenseTensor<T>> {
        if self.boundary != MpoBoundary::Open {
            return Err(Error::dim("to_dense needs an open MPO; take a window first"));
        }
        let d = self.local_dim;
        let total = (d as f64).powi(self.len() as i32);
        if total > 4096.0 {
            return Err(Error::dim(format!("dense reconstruction of dimension {total} refused")));
        }
        // acc[o, i, w]
        let w0 = &self.site_tensors[0];
        let mut acc = DenseTensor::from_raw(
            vec![d, d, w0.shape()[3]],
            w0.data().to_vec(),
        );
        for w in &self.site_tensors[1..] {
            let (o, i) = (acc.shape()[0], acc.shape()[1]);
            let wr = w.shape()[3];
            let c = contract(&acc, w, &[(2, 0)])?; // [o, i, so, si, wr]
            acc = c.permute(&[0, 2, 1, 3, 4])?.reshape(vec![o * d, i * d, wr])?;
        }
        let n = acc.shape()[0];
        acc.reshape(vec![n, n])
    }

    /// Dense Hermiticity check for short chains.
    pub fn is_hermitian(&self, tol: f64) -> Result<bool> {
        let h = self.to_dense()?;
        let ht = h.adjoint()?;
        Ok(h.data().iter().zip(ht.data()).all(|(a, b)| (*a - *b).modulus() <= tol))
    }

    pub(crate) fn blocks(&self, i: usize) -> Vec<MpoBlock<T>> {
        let w = self.site(i);
        let (wl, d, wr) = (w.shape()[0], w.shape()[1], w.shape()[3]);
        let mut out = Vec::new();
        for a in 0..wl {
            for b in 0..wr {
                let mut mat = vec![T::zero(); d * d];
                let mut nz = false;
                for so in 0..d {
                    for si in 0..d {
                        let v = w.get(&[a, so, si, b]);
                        if v != T::zero() {
                            nz = true;
                        }
                        mat[si * d + so] = v;
                    }
                }
                if nz {
                    out.push(MpoBlock { wl: a, wr: b, mat });
                }
            }
        }
        out
    }
}

impl MpoOperator<f64> {
    pub fn to_complex(&self) -> MpoOperator<C64> {
        MpoOperator {
            site_tensors: self
                .site_tensors
                .iter()
                .map(|w| DenseTensor::from_raw(w.shape().to_vec(), w.data().iter().map(|&x| C64::new(x, 0.0)).collect()))
                .collect(),
            local_dim: self.local_dim,
            boundary: self.boundary,
        }
    }
}

fn slice_left<T: Scalar>(w: &DenseTensor<T>, row: usize) -> DenseTensor<T> {
    let s = w.shape();
    DenseTensor::from_fn(vec![1, s[1], s[2], s[3]], |i| w.get(&[row, i[1], i[2], i[3]]))
}

fn slice_right<T: Scalar>(w: &DenseTensor<T>, col: usize) -> DenseTensor<T> {
    let s = w.shape();
    DenseTensor::from_fn(vec![s[0], s[1], s[2], 1], |i| w.get(&[i[0], i[1], i[2], col]))
}

/// Bulk tensor for H = Σ_i h_i + Σ_i Σ_c A_c(i) B_c(i+1). Operators are d×d [out, in].
pub fn nearest_neighbour_bulk<T: Scalar>(
    onsite: &DenseTensor<T>,
    couplings: &[(DenseTensor<T>, DenseTensor<T>)],
) -> Result<DenseTensor<T>> {
    let d = onsite.shape()[0];
    let ok = |m: &DenseTensor<T>| m.rank() == 2 && m.shape() == [d, d];
    if !ok(onsite) || couplings.iter().any(|(a, b)| !ok(a) || !ok(b)) {
        return Err(Error::dim("local operators must all be d x d"));
    }
    let w = couplings.len() + 2;
    let last = w - 1;
    let eye = DenseTensor::<T>::eye(d);
    let mut bulk = DenseTensor::zeros(vec![w, d, d, w]);
    let mut put = |wl: usize, wr: usize, m: &DenseTensor<T>| {
        for so in 0..d {
            for si in 0..d {
                bulk.set(&[wl, so, si, wr], m.get(&[so, si]));
            }
        }
    };
    put(0, 0, &eye);
    put(last, last, &eye);
    put(0, last, onsite);
    for (c, (a, b)) in couplings.iter().enumerate() {
        put(0, c + 1, a);
        put(c + 1, last, b);
    }
    Ok(bulk)
}
