//! The two lattice regularizations and the maps between their couplings and
//! sine-Gordon parameters.
//!
//! * QEC array: a chain of superconducting islands with charge n_i and phase φ_i,
//!   truncated to n ∈ [−n_max, n_max].
//! * XYZ chain: anisotropic spin-1/2 chain with H = −½ Σ (Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ).

mod builders;
mod dense;
mod maps;
mod operators;
mod params;

pub use builders::{build_qec_mpo, build_xyz_mpo, ChainLength};
pub use dense::{qec_dense_hamiltonian, xyz_dense_hamiltonian};
pub use maps::{
    m0_from_soliton_mass, perturbative_luttinger, qec_to_sg, sg_to_xyz, sg_to_xyz_relaxed,
    soliton_mass_from_sigma, xyz_to_sg, XyzMapping,
};
pub use operators::{charge_operator, pauli, vertex_operator_matrix, Pauli};
pub use params::{QecParams, RegimeWarning, SgParams, XyzParams};
