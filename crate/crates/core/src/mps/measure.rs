use serde::{Deserialize, Serialize};

use super::state::{transfer_left, transfer_right, MpsState};
use crate::error::{Error, Result};
use crate::tensor::{arnoldi_largest, DenseTensor, Scalar, C64};

fn check_op<T: Scalar>(op: &DenseTensor<T>, d: usize) -> Result<()> {
    if op.shape() != [d, d] {
        return Err(Error::dim(format!("operator shape {:?} but local dimension {d}", op.shape())));
    }
    Ok(())
}

fn diag_sq<T: Scalar>(s: &[f64]) -> DenseTensor<T> {
    DenseTensor::from_fn(vec![s.len(), s.len()], |i| {
        if i[0] == i[1] { T::from_real(s[i[0]] * s[i[0]]) } else { T::zero() }
    })
}

fn trace<T: Scalar>(m: &DenseTensor<T>) -> T {
    (0..m.shape()[0]).map(|i| m.get(&[i, i])).sum()
}

/// Left and right environments of a finite state, built without any canonical assumption.
struct FiniteEnvs<T> {
    left: Vec<DenseTensor<T>>,
    right: Vec<DenseTensor<T>>,
    norm2: f64,
}

fn finite_envs<T: Scalar>(s: &MpsState<T>) -> Result<FiniteEnvs<T>> {
    let n = s.len();
    let one = DenseTensor::from_raw(vec![1, 1], vec![T::one()]);
    let mut left = vec![one.clone(); n + 1];
    for i in 0..n {
        left[i + 1] = transfer_left(&left[i], s.site(i), None)?;
    }
    let mut right = vec![one; n + 1];
    for i in (0..n).rev() {
        right[i] = transfer_right(&right[i + 1], s.site(i), None)?;
    }
    let norm2 = left[n].data()[0].re();
    if !(norm2 > 0.0) {
        return Err(Error::Numerical("state has zero norm".into()));
    }
    Ok(FiniteEnvs { left, right, norm2 })
}

/// Tr(E · F) for E [bra, ket] and F [ket, bra].
fn close<T: Scalar>(e: &DenseTensor<T>, f: &DenseTensor<T>) -> T {
    let n = e.shape()[0];
    let m = e.shape()[1];
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..m {
            acc += e.get(&[i, j]) * f.get(&[j, i]);
        }
    }
    acc
}

/// ⟨ψ|op_site|ψ⟩ for a normalized view of the state.
pub fn measure_local<T: Scalar>(state: &MpsState<T>, op: &DenseTensor<T>, site: usize) -> Result<C64> {
    check_op(op, state.local_dim())?;
    if state.is_infinite() {
        let e = diag_sq::<T>(&state.bond_spectra()[site % state.len()]);
        let e2 = transfer_left(&e, state.site(site), Some(op))?;
        return Ok(trace(&e2).to_c64());
    }
    if site >= state.len() {
        return Err(Error::dim(format!("site {site} outside chain of {}", state.len())));
    }
    let env = finite_envs(state)?;
    let e = transfer_left(&env.left[site], state.site(site), Some(op))?;
    Ok(close(&e, &env.right[site + 1]).to_c64() / env.norm2)
}

/// Expectation of a product of single-site operators on distinct sites of a finite state.
pub fn measure_product<T: Scalar>(state: &MpsState<T>, ops: &[(usize, &DenseTensor<T>)]) -> Result<C64> {
    if state.is_infinite() {
        return Err(Error::Contract("measure_product is for finite states".into()));
    }
    for (site, op) in ops {
        check_op(op, state.local_dim())?;
        if *site >= state.len() {
            return Err(Error::dim("site out of range"));
        }
    }
    let mut e = DenseTensor::from_raw(vec![1, 1], vec![T::one()]);
    for i in 0..state.len() {
        let op = ops.iter().find(|(s, _)| *s == i).map(|(_, o)| *o);
        e = transfer_left(&e, state.site(i), op)?;
    }
    let n2 = state.norm()?.powi(2);
    Ok(e.data()[0].to_c64() / n2)
}

/// ⟨A_i B_{i+r}⟩ for r = 1..=r_max, reusing the transfer environment between distances.
/// Finite states use the center site i = L/2; infinite states use cell site 0.
pub fn measure_two_point<T: Scalar>(
    state: &MpsState<T>,
    op_a: &DenseTensor<T>,
    op_b: &DenseTensor<T>,
    r_max: usize,
) -> Result<Vec<(usize, C64)>> {
    let d = state.local_dim();
    check_op(op_a, d)?;
    check_op(op_b, d)?;
    if r_max == 0 {
        return Err(Error::domain("r_max must be at least 1"));
    }
    let mut out = Vec::with_capacity(r_max);
    if state.is_infinite() {
        let e0 = diag_sq::<T>(&state.bond_spectra()[0]);
        let mut e = transfer_left(&e0, state.site(0), Some(op_a))?;
        for r in 1..=r_max {
            let closed = transfer_left(&e, state.site(r), Some(op_b))?;
            out.push((r, trace(&closed).to_c64()));
            e = transfer_left(&e, state.site(r), None)?;
        }
        return Ok(out);
    }
    let i = state.len() / 2;
    if i + r_max >= state.len() {
        return Err(Error::dim(format!(
            "r_max = {r_max} from center site {i} runs past the chain end ({} sites)",
            state.len()
        )));
    }
    let env = finite_envs(state)?;
    let mut e = transfer_left(&env.left[i], state.site(i), Some(op_a))?;
    for r in 1..=r_max {
        let closed = transfer_left(&e, state.site(i + r), Some(op_b))?;
        out.push((r, close(&closed, &env.right[i + r + 1]).to_c64() / env.norm2));
        e = transfer_left(&e, state.site(i + r), None)?;
    }
    Ok(out)
}

/// Entanglement levels of one cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSpectrum {
    /// Schmidt probabilities p_n = s_n², descending, zeros dropped.
    pub probabilities: Vec<f64>,
    /// ε_n = −ln p_n + ln p_0, ascending with ε_0 = 0.
    pub levels: Vec<f64>,
    /// Cluster sizes of nearly degenerate levels, in level order.
    pub multiplicities: Vec<usize>,
    /// Mean level of each cluster.
    pub cluster_means: Vec<f64>,
    /// Absolute tolerance used for clustering.
    pub cluster_tol: f64,
    /// Slope of the first three cluster means against their index, if resolvable.
    pub spacing: Option<f64>,
}

impl EntanglementSpectrum {
    /// Clustering tolerance is a fraction of the largest gap among the lowest eight levels.
    pub const CLUSTER_FRACTION: f64 = 0.05;

    pub fn from_schmidt(s: &[f64]) -> Self {
        let mut p: Vec<f64> = s.iter().map(|x| x * x).filter(|&x| x > 0.0).collect();
        p.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        // Values at the double-precision floor carry no information.
        let floor = p.first().copied().unwrap_or(1.0) * 1e-28;
        p.retain(|&x| x > floor);
        let p0 = p.first().copied().unwrap_or(1.0);
        let levels: Vec<f64> = p.iter().map(|&x| if x == p0 { 0.0 } else { -x.ln() + p0.ln() }).collect();
        let gap = levels
            .windows(2)
            .take(7)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        let tol = Self::CLUSTER_FRACTION * gap;
        Self::with_levels(p, levels, tol)
    }

    /// Re-clusters with an explicit tolerance.
    pub fn recluster(&self, tol: f64) -> Self {
        Self::with_levels(self.probabilities.clone(), self.levels.clone(), tol)
    }

    fn with_levels(p: Vec<f64>, levels: Vec<f64>, tol: f64) -> Self {
        let mut mult = Vec::new();
        let mut means = Vec::new();
        let mut start = 0;
        for i in 1..=levels.len() {
            if i == levels.len() || levels[i] - levels[i - 1] > tol {
                let c = &levels[start..i];
                mult.push(c.len());
                means.push(c.iter().sum::<f64>() / c.len() as f64);
                start = i;
            }
        }
        let spacing = (means.len() >= 3).then(|| ols_slope(&means[..3]));
        Self { probabilities: p, levels, multiplicities: mult, cluster_means: means, cluster_tol: tol, spacing }
    }
}

/// Least-squares slope of y against 0, 1, 2, ….
pub(crate) fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

pub fn entanglement_spectrum<T: Scalar>(state: &MpsState<T>, bond: usize) -> Result<EntanglementSpectrum> {
    Ok(EntanglementSpectrum::from_schmidt(&state.schmidt_values(bond)?))
}

/// Von Neumann entropy −Σ p ln p across `bond`.
pub fn entanglement_entropy<T: Scalar>(state: &MpsState<T>, bond: usize) -> Result<f64> {
    let s = state.schmidt_values(bond)?;
    Ok(s.iter().map(|x| x * x).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum())
}

/// Transfer-matrix correlation length ξ = −n_cell/ln|λ₂| of an infinite state.
pub fn correlation_length<T: Scalar>(state: &MpsState<T>) -> Result<f64> {
    Ok(transfer_spectrum(state, 1)?.correlation_length)
}

/// Subleading transfer-matrix eigenvalues and the correlation length derived from them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransferSpectrum {
    /// Moduli of the leading eigenvalues after removing the fixed point, descending.
    pub moduli: Vec<f64>,
    pub correlation_length: f64,
}

pub fn transfer_spectrum<T: Scalar>(state: &MpsState<T>, count: usize) -> Result<TransferSpectrum> {
    if !state.is_infinite() {
        return Err(Error::Contract("correlation length needs an infinite state".into()));
    }
    let n = state.len();
    let chi = state.site(0).shape()[0];
    if chi == 1 {
        return Ok(TransferSpectrum { moduli: vec![0.0; count], correlation_length: 0.0 });
    }
    let c = state.to_complex();
    let lam0: Vec<C64> = diag_sq::<C64>(&state.bond_spectra()[0]).into_data();
    // Right-canonical cell: the right fixed point is 1 and the left one Λ₀².
    let apply = |x: &[C64]| -> Vec<C64> {
        let mut m = DenseTensor::from_raw(vec![chi, chi], x.to_vec());
        for site in (0..n).rev() {
            m = transfer_right(&m, c.site(site), None).expect("shapes checked at construction");
        }
        let proj: C64 = lam0.iter().zip(x).map(|(a, b)| a * b).sum();
        let mut out = m.into_data();
        for i in 0..chi {
            out[i * chi + i] -= proj;
        }
        out
    };
    let v0: Vec<C64> = (0..chi * chi).map(|i| C64::new(1.0 + (i as f64 * 0.37).sin(), 0.1 * (i as f64).cos())).collect();
    let nev = count.min(chi * chi);
    let pairs = arnoldi_largest(apply, &v0, nev, 1e-10, 60, 400)?;
    let moduli: Vec<f64> = pairs.iter().map(|p| p.value.norm()).collect();
    let l2 = moduli[0];
    if l2 >= 1.0 - 1e-12 {
        return Err(Error::NonInjective(l2));
    }
    let xi = if l2 <= 0.0 { 0.0 } else { -(n as f64) / l2.ln() };
    Ok(TransferSpectrum { moduli, correlation_length: xi })
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_ladder_and_clusters() {
        // p ∝ e^{−0.8 n} with degeneracies 1, 1, 2
        let w = [0.0, 0.8, 1.6, 1.6, 2.4];
        let s: Vec<f64> = w.iter().map(|x: &f64| (-x / 2.0).exp()).collect();
        let es = EntanglementSpectrum::from_schmidt(&s);
        assert_eq!(es.levels[0], 0.0);
        assert_eq!(es.multiplicities, vec![1, 1, 2, 1]);
        assert!((es.spacing.unwrap() - 0.8).abs() < 1e-12);
        let tot: f64 = es.probabilities.iter().sum();
        assert!((tot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_and_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let es = EntanglementSpectrum::from_schmidt(&[h, h]);
        assert_eq!(es.levels, vec![0.0, 0.0]);
        assert_eq!(EntanglementSpectrum::from_schmidt(&[1.0]).levels, vec![0.0]);
    }
}
