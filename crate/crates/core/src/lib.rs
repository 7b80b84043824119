//! Numerical laboratory for lattice regularizations of the quantum sine-Gordon model.
//!
//! The crate is layered bottom-up: [`tensor`] (dense algebra), [`specfun`] (special
//! functions and quadrature), [`mps`] (DMRG and measurements), [`models`] (the Josephson
//! array and XYZ chain plus parameter maps) and [`analytics`] (exact field-theory results).

pub mod analytics;
pub mod error;
pub mod models;
pub mod mps;
pub mod par;
pub mod specfun;
pub mod tensor;

pub use error::{Error, Result};
