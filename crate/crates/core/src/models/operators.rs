use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Charge-lowering shift S|n⟩ = |n−1⟩ on n ∈ [−n_max, n_max] (basis index i ↔ n = i − n_max).
///
/// Hard cutoff: S|−n_max⟩ = 0. Then e^{iφ} = S†, cos φ = (S + S†)/2.
pub fn vertex_operator_matrix(n_max: usize) -> Result<DenseTensor<f64>> {
    if n_max < 1 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let d = 2 * n_max + 1;
    Ok(DenseTensor::from_fn(vec![d, d], |i| if i[0] + 1 == i[1] { 1.0 } else { 0.0 }))
}

/// diag(−n_max, …, n_max).
pub fn charge_operator(n_max: usize) -> Result<DenseTensor<f64>> {
    if n_max < 1 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let d = 2 * n_max + 1;
    Ok(DenseTensor::from_fn(vec![d, d], |i| {
        if i[0] == i[1] { i[0] as f64 - n_max as f64 } else { 0.0 }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    /// iσʸ = [[0, 1], [−1, 0]], real so the XYZ chain stays real.
    IY,
    Z,
    /// σ⁺ = [[0, 1], [0, 0]] (index 0 = spin up).
    Plus,
    Minus,
}

pub fn pauli(which: Pauli) -> DenseTensor<f64> {
    let m = match which {
        Pauli::X => [0.0, 1.0, 1.0, 0.0],
        Pauli::IY => [0.0, 1.0, -1.0, 0.0],
        Pauli::Z => [1.0, 0.0, 0.0, -1.0],
        Pauli::Plus => [0.0, 1.0, 0.0, 0.0],
        Pauli::Minus => [0.0, 0.0, 1.0, 0.0],
    };
    DenseTensor::from_fn(vec![2, 2], |i| m[2 * i[0] + i[1]])
}
