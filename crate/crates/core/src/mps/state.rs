use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{contract, svd_truncate, DenseTensor, Scalar, TruncationPolicy, C64};

/// Which isometry conditions a state guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanonicalForm {
    /// Every site satisfies Σ_s A†A = 1.
    LeftCanonical,
    /// Every site satisfies Σ_s BB† = 1.
    RightCanonical,
    /// Sites left of the center are left isometries, sites right of it right isometries.
    Mixed(usize),
    /// Right-canonical unit cell of the given length; spectra sit on the bond left of each site.
    InfiniteUnitCell(usize),
    /// No guarantee (e.g. after an arbitrary gauge transformation).
    General,
}

/// Matrix-product state with site tensors A[left, phys, right].
///
/// Finite states store L+1 bond spectra (the outer two are `[1.0]`); bond b sits left of
/// site b. Infinite states store one spectrum per unit-cell site, again left of the site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MpsState<T> {
    site_tensors: Vec<DenseTensor<T>>,
    bond_spectra: Vec<Vec<f64>>,
    form: CanonicalForm,
    local_dim: usize,
}

impl<T: Scalar> MpsState<T> {
    pub fn new(
        site_tensors: Vec<DenseTensor<T>>,
        bond_spectra: Vec<Vec<f64>>,
        form: CanonicalForm,
        local_dim: usize,
    ) -> Result<Self> {
        let n = site_tensors.len();
        if n == 0 {
            return Err(Error::dim("MPS needs at least one site"));
        }
        for t in &site_tensors {
            if t.rank() != 3 || t.shape()[1] != local_dim {
                return Err(Error::dim(format!("site tensor shape {:?} vs d = {local_dim}", t.shape())));
            }
        }
        let infinite = matches!(form, CanonicalForm::InfiniteUnitCell(_));
        for i in 0..n {
            let next = if infinite { (i + 1) % n } else { i + 1 };
            if next < n && site_tensors[i].shape()[2] != site_tensors[next].shape()[0] {
                return Err(Error::dim(format!("bond {} extents do not match", i + 1)));
            }
        }
        if infinite {
            if let CanonicalForm::InfiniteUnitCell(c) = form {
                if c != n {
                    return Err(Error::dim("unit-cell length disagrees with tensor count"));
                }
            }
            if bond_spectra.len() != n {
                return Err(Error::dim("infinite state needs one spectrum per cell site"));
            }
            for (i, s) in bond_spectra.iter().enumerate() {
                if s.len() != site_tensors[i].shape()[0] {
                    return Err(Error::dim(format!("spectrum {i} length mismatch")));
                }
            }
        } else {
            if site_tensors[0].shape()[0] != 1 || site_tensors[n - 1].shape()[2] != 1 {
                return Err(Error::dim("finite MPS needs unit outer bonds"));
            }
            if bond_spectra.len() != n + 1 {
                return Err(Error::dim("finite state needs L+1 bond spectra"));
            }
        }
        Ok(Self { site_tensors, bond_spectra, form, local_dim })
    }

    /// Product state |s_0 s_1 …⟩ from local basis indices.
    pub fn product(local: &[usize], local_dim: usize) -> Result<Self> {
        if local.iter().any(|&s| s >= local_dim) {
            return Err(Error::dim("local index out of range"));
        }
        let tensors = local
            .iter()
            .map(|&s| DenseTensor::from_fn(vec![1, local_dim, 1], |i| if i[1] == s { T::one() } else { T::zero() }))
            .collect();
        Self::new(tensors, vec![vec![1.0]; local.len() + 1], CanonicalForm::RightCanonical, local_dim)
    }

    /// Normalized random state with bonds min(χ, d^i, d^{L−i}), right-canonical.
    pub fn random(length: usize, local_dim: usize, chi: usize, seed: u64) -> Result<Self> {
        if length == 0 || local_dim == 0 || chi == 0 {
            return Err(Error::dim("random MPS needs positive length, d and chi"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bond = |b: usize| -> usize {
            let l = (local_dim as f64).powi(b as i32);
            let r = (local_dim as f64).powi((length - b) as i32);
            (chi as f64).min(l).min(r) as usize
        };
        let tensors = (0..length)
            .map(|i| {
                DenseTensor::from_fn(vec![bond(i), local_dim, bond(i + 1)], |_| {
                    T::from_re_im(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                })
            })
            .collect();
        let mut s = Self::new(tensors, vec![vec![1.0]; length + 1], CanonicalForm::General, local_dim)?;
        s.canonicalize_right()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.site_tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_tensors.is_empty()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn form(&self) -> CanonicalForm {
        self.form
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.form, CanonicalForm::InfiniteUnitCell(_))
    }

    pub fn site(&self, i: usize) -> &DenseTensor<T> {
        &self.site_tensors[i % self.site_tensors.len()]
    }

    pub fn sites(&self) -> &[DenseTensor<T>] {
        &self.site_tensors
    }

    pub fn bond_spectra(&self) -> &[Vec<f64>] {
        &self.bond_spectra
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.site_tensors.iter().map(|t| t.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.site_tensors.iter().map(|t| t.shape()[0].max(t.shape()[2])).max().unwrap_or(1)
    }

    pub(crate) fn into_parts(self) -> (Vec<DenseTensor<T>>, Vec<Vec<f64>>) {
        (self.site_tensors, self.bond_spectra)
    }

    /// Replaces site `i` and its right neighbour bond through an arbitrary invertible gauge;
    /// drops all canonical guarantees. Used to test gauge invariance.
    pub fn apply_bond_gauge(&mut self, bond: usize, g: &DenseTensor<T>, g_inv: &DenseTensor<T>) -> Result<()> {
        let n = self.len();
        if bond == 0 || (!self.is_infinite() && bond >= n) {
            return Err(Error::dim("gauge bond must be internal"));
        }
        let (l, r) = ((bond + n - 1) % n, bond % n);
        let left = contract(&self.site_tensors[l], g, &[(2, 0)])?;
        let right = contract(g_inv, &self.site_tensors[r], &[(1, 0)])?;
        self.site_tensors[l] = left;
        self.site_tensors[r] = right;
        self.form = CanonicalForm::General;
        Ok(())
    }

    /// Norm ⟨ψ|ψ⟩^{1/2} of a finite state.
    pub fn norm(&self) -> Result<f64> {
        if self.is_infinite() {
            return Err(Error::Contract("norm of an infinite state is fixed by its canonical form".into()));
        }
        let mut e = DenseTensor::from_raw(vec![1, 1], vec![T::one()]);
        for a in &self.site_tensors {
            e = transfer_left(&e, a, None)?;
        }
        Ok(e.data()[0].re().max(0.0).sqrt())
    }

    /// Left sweep of exact SVDs: all sites become left isometries, spectra are filled in.
    fn sweep_left_to_right(&mut self) -> Result<()> {
        let n = self.len();
        let d = self.local_dim;
        let exact = TruncationPolicy::chi(usize::MAX);
        for i in 0..n {
            let t = &self.site_tensors[i];
            let (a, b) = (t.shape()[0], t.shape()[2]);
            let m = t.clone().reshape(vec![a * d, b])?;
            let svd = svd_truncate(&m, &exact)?;
            let k = svd.s.len();
            let norm: f64 = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Numerical("state has zero norm".into()));
            }
            self.site_tensors[i] = svd.u.reshape(vec![a, d, k])?;
            let sv = DenseTensor::from_fn(vec![k, b], |x| svd.v.get(x) * T::from_real(svd.s[x[0]] / norm));
            if i + 1 < n {
                self.site_tensors[i + 1] = contract(&sv, &self.site_tensors[i + 1], &[(1, 0)])?;
                self.bond_spectra[i + 1] = svd.s.iter().map(|x| x / norm).collect();
            } else {
                // 1×1 phase; fold it back so the last tensor stays a left isometry
                let last = contract(&self.site_tensors[i], &sv, &[(2, 0)])?;
                self.site_tensors[i] = last;
            }
        }
        Ok(())
    }

    fn sweep_right_to_left(&mut self) -> Result<()> {
        let n = self.len();
        let d = self.local_dim;
        let exact = TruncationPolicy::chi(usize::MAX);
        for i in (0..n).rev() {
            let t = &self.site_tensors[i];
            let (a, b) = (t.shape()[0], t.shape()[2]);
            let m = t.clone().reshape(vec![a, d * b])?;
            let svd = svd_truncate(&m, &exact)?;
            let k = svd.s.len();
            let norm: f64 = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Numerical("state has zero norm".into()));
            }
            self.site_tensors[i] = svd.v.reshape(vec![k, d, b])?;
            let us = DenseTensor::from_fn(vec![a, k], |x| svd.u.get(x) * T::from_real(svd.s[x[1]] / norm));
            if i > 0 {
                self.site_tensors[i - 1] = contract(&self.site_tensors[i - 1], &us, &[(2, 0)])?;
                self.bond_spectra[i] = svd.s.iter().map(|x| x / norm).collect();
            } else {
                self.site_tensors[0] = contract(&us, &self.site_tensors[0], &[(1, 0)])?;
            }
        }
        Ok(())
    }

    /// Normalizes and brings a finite state to right-canonical form with exact Schmidt spectra.
    pub fn canonicalize_right(&mut self) -> Result<()> {
        if self.is_infinite() {
            return Err(Error::Contract("canonicalize_right applies to finite states".into()));
        }
        self.sweep_left_to_right()?;
        self.sweep_right_to_left()?;
        self.form = CanonicalForm::RightCanonical;
        Ok(())
    }

    /// Normalizes and brings a finite state to left-canonical form with exact Schmidt spectra.
    pub fn canonicalize_left(&mut self) -> Result<()> {
        if self.is_infinite() {
            return Err(Error::Contract("canonicalize_left applies to finite states".into()));
        }
        self.sweep_right_to_left()?;
        self.sweep_left_to_right()?;
        self.form = CanonicalForm::LeftCanonical;
        Ok(())
    }

    /// Schmidt values across `bond` (left of site `bond`).
    pub fn schmidt_values(&self, bond: usize) -> Result<Vec<f64>> {
        let n = self.len();
        match self.form {
            CanonicalForm::InfiniteUnitCell(_) => Ok(self.bond_spectra[bond % n].clone()),
            CanonicalForm::LeftCanonical | CanonicalForm::RightCanonical => {
                if bond > n {
                    return Err(Error::dim(format!("bond {bond} outside 0..={n}")));
                }
                Ok(self.bond_spectra[bond].clone())
            }
            _ => {
                let mut c = self.clone();
                c.canonicalize_right()?;
                c.schmidt_values(bond)
            }
        }
    }

    /// Largest violation of the isometry and normalization conditions claimed by `form`.
    pub fn canonical_defect(&self) -> Result<f64> {
        let n = self.len();
        let mut worst: f64 = 0.0;
        let left_iso = |t: &DenseTensor<T>| -> Result<f64> {
            let (a, d, b) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            let m = t.clone().reshape(vec![a * d, b])?;
            Ok(identity_defect(&m.adjoint()?.matmul(&m)?))
        };
        let right_iso = |t: &DenseTensor<T>| -> Result<f64> {
            let (a, d, b) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            let m = t.clone().reshape(vec![a, d * b])?;
            Ok(identity_defect(&m.matmul(&m.adjoint()?)?))
        };
        let spectra_defect = |s: &[f64]| (s.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
        match self.form {
            CanonicalForm::LeftCanonical => {
                for t in &self.site_tensors {
                    worst = worst.max(left_iso(t)?);
                }
            }
            CanonicalForm::RightCanonical => {
                for t in &self.site_tensors {
                    worst = worst.max(right_iso(t)?);
                }
            }
            CanonicalForm::Mixed(c) => {
                for (i, t) in self.site_tensors.iter().enumerate() {
                    if i < c {
                        worst = worst.max(left_iso(t)?);
                    } else if i > c {
                        worst = worst.max(right_iso(t)?);
                    }
                }
            }
            CanonicalForm::InfiniteUnitCell(_) => {
                for (i, t) in self.site_tensors.iter().enumerate() {
                    worst = worst.max(right_iso(t)?);
                    // Λ_i² B_i must reproduce Λ_{i+1}² as left fixed point.
                    let l = &self.bond_spectra[i];
                    let e = DenseTensor::from_fn(vec![l.len(), l.len()], |x| {
                        if x[0] == x[1] { T::from_real(l[x[0]] * l[x[0]]) } else { T::zero() }
                    });
                    let e2 = transfer_left(&e, t, None)?;
                    let r = &self.bond_spectra[(i + 1) % n];
                    let want = DenseTensor::from_fn(vec![r.len(), r.len()], |x| {
                        if x[0] == x[1] { T::from_real(r[x[0]] * r[x[0]]) } else { T::zero() }
                    });
                    let diff = e2.data().iter().zip(want.data()).map(|(a, b)| (*a - *b).modulus()).fold(0.0, f64::max);
                    worst = worst.max(diff);
                }
            }
            CanonicalForm::General => return Ok(0.0),
        }
        if !matches!(self.form, CanonicalForm::Mixed(_)) {
            for s in &self.bond_spectra {
                worst = worst.max(spectra_defect(s));
            }
        }
        Ok(worst)
    }

    /// Errors if the claimed canonical form is violated beyond `tol`.
    pub fn audit(&self, tol: f64) -> Result<()> {
        let d = self.canonical_defect()?;
        if d > tol {
            return Err(Error::Numerical(format!("canonical form {:?} violated by {d:e}", self.form)));
        }
        Ok(())
    }

    /// Full state vector (first site most significant). Small chains only.
    pub fn to_dense_vector(&self) -> Result<Vec<T>> {
        if self.is_infinite() {
            return Err(Error::Contract("infinite state has no dense vector".into()));
        }
        let total = (self.local_dim as f64).powi(self.len() as i32);
        if total > (1u64 << 22) as f64 {
            return Err(Error::dim("state vector too large"));
        }
        let mut acc = self.site_tensors[0].clone();
        for t in &self.site_tensors[1..] {
            let s = acc.shape().to_vec();
            let c = contract(&acc, t, &[(2, 0)])?;
            let b = t.shape()[2];
            acc = c.reshape(vec![s[0], s[1] * self.local_dim, b])?;
        }
        Ok(acc.into_data())
    }

    pub fn to_complex(&self) -> MpsState<C64> {
        MpsState {
            site_tensors: self
                .site_tensors
                .iter()
                .map(|t| DenseTensor::from_raw(t.shape().to_vec(), t.data().iter().map(|x| x.to_c64()).collect()))
                .collect(),
            bond_spectra: self.bond_spectra.clone(),
            form: self.form,
            local_dim: self.local_dim,
        }
    }
}

fn identity_defect<T: Scalar>(m: &DenseTensor<T>) -> f64 {
    let n = m.shape()[0];
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { T::one() } else { T::zero() };
            worst = worst.max((m.get(&[i, j]) - want).modulus());
        }
    }
    worst
}

/// E'[b', b] = Σ E[a', a] conj(A[a', s', b']) op[s', s] A[a, s, b]  (E is [bra, ket]).
pub(crate) fn transfer_left<T: Scalar>(
    e: &DenseTensor<T>,
    a: &DenseTensor<T>,
    op: Option<&DenseTensor<T>>,
) -> Result<DenseTensor<T>> {
    let ea = contract(e, a, &[(1, 0)])?; // [a', s, b]
    let ea = match op {
        Some(o) => contract(o, &ea, &[(1, 1)])?.permute(&[1, 0, 2])?, // [a', s', b]
        None => ea,
    };
    contract(&a.conj(), &ea, &[(0, 0), (1, 1)]) // [b', b]
}

/// F'[a, a'] = Σ A[a, s, b] op[s', s] conj(A[a', s', b']) F[b, b']  (F is [ket, bra]).
pub(crate) fn transfer_right<T: Scalar>(
    f: &DenseTensor<T>,
    a: &DenseTensor<T>,
    op: Option<&DenseTensor<T>>,
) -> Result<DenseTensor<T>> {
    let af = contract(a, f, &[(2, 0)])?; // [a, s, b']
    let af = match op {
        Some(o) => contract(o, &af, &[(1, 1)])?.permute(&[1, 0, 2])?, // [a, s', b']
        None => af,
    };
    contract(&af, &a.conj(), &[(1, 1), (2, 2)]) // [a, a']
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_state_is_right_canonical_and_normalized() {
        let s = MpsState::<f64>::random(7, 3, 5, 11).unwrap();
        s.audit(1e-12).unwrap();
        assert!((s.norm().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.bond_dims(), vec![3, 5, 5, 5, 5, 3, 1]);
        let mut l = s.clone();
        l.canonicalize_left().unwrap();
        l.audit(1e-12).unwrap();
        for b in 0..=7 {
            let (x, y) = (s.schmidt_values(b).unwrap(), l.schmidt_values(b).unwrap());
            for (p, q) in x.iter().zip(&y) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_state_vector() {
        let s = MpsState::<f64>::product(&[1, 0, 1], 2).unwrap();
        let v = s.to_dense_vector().unwrap();
        assert_eq!(v.iter().position(|&x| x == 1.0), Some(0b101));
        assert_eq!(s.schmidt_values(1).unwrap(), vec![1.0]);
    }

    #[test]
    fn complex_random_state() {
        let s = MpsState::<C64>::random(5, 2, 4, 2).unwrap();
        s.audit(1e-12).unwrap();
        let v = s.to_dense_vector().unwrap();
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
