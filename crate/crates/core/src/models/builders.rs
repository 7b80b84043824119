use serde::{Deserialize, Serialize};

use super::operators::{charge_operator, pauli, vertex_operator_matrix, Pauli};
use super::params::{QecParams, XyzParams};
use crate::error::Result;
use crate::mps::{nearest_neighbour_bulk, MpoOperator};
use crate::tensor::DenseTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainLength {
    Finite(usize),
    /// Two-site unit cell for iDMRG.
    Infinite,
}

fn assemble(bulk: DenseTensor<f64>, length: ChainLength) -> Result<MpoOperator<f64>> {
    match length {
        ChainLength::Finite(l) => MpoOperator::open_from_bulk(&bulk, l),
        ChainLength::Infinite => MpoOperator::infinite_from_bulk(&bulk, 2),
    }
}

fn scaled(m: &DenseTensor<f64>, c: f64) -> DenseTensor<f64> {
    m.scale(c)
}

/// Josephson array: E_C0 Σn² + δE_C0 Σn_i n_{i+1} − E_g Σn − E_J Σcos(φ_i−φ_{i+1}) − E_J0 Σcos φ.
///
/// Real MPO of bond dimension 5.
pub fn build_qec_mpo(p: &QecParams, length: ChainLength) -> Result<MpoOperator<f64>> {
    p.validate()?;
    let n = charge_operator(p.n_max)?;
    let s = vertex_operator_matrix(p.n_max)?;
    let sd = s.adjoint()?;
    let d = p.local_dim();
    let onsite = DenseTensor::from_fn(vec![d, d], |i| {
        let (a, b) = (i[0], i[1]);
        let nn = n.get(&[a, b]);
        p.e_c0 * nn * nn - p.e_g * nn - 0.5 * p.e_j0 * (s.get(&[a, b]) + sd.get(&[a, b]))
    });
    // e^{iφ_i} e^{−iφ_{i+1}} = S†_i S_{i+1}
    let couplings = vec![
        (n.clone(), scaled(&n, p.delta * p.e_c0)),
        (sd.clone(), scaled(&s, -0.5 * p.e_j)),
        (s.clone(), scaled(&sd, -0.5 * p.e_j)),
    ];
    assemble(nearest_neighbour_bulk(&onsite, &couplings)?, length)
}

/// XYZ chain −½ Σ (Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ), real basis with σʸσʸ = −(iσʸ)(iσʸ).
pub fn build_xyz_mpo(p: &XyzParams, length: ChainLength) -> Result<MpoOperator<f64>> {
    let x = pauli(Pauli::X);
    let iy = pauli(Pauli::IY);
    let z = pauli(Pauli::Z);
    let couplings = vec![
        (x.clone(), scaled(&x, -0.5 * p.jx)),
        (iy.clone(), scaled(&iy, 0.5 * p.jy)),
        (z.clone(), scaled(&z, -0.5 * p.jz)),
    ];
    assemble(nearest_neighbour_bulk(&DenseTensor::zeros(vec![2, 2]), &couplings)?, length)
}
