//! Exact predictions of the continuum sine-Gordon theory and of Baxter's corner transfer
//! matrices for the XYZ chain.

mod ctm;
mod formfactor;
mod predict;
mod sg;

pub use ctm::{
    ctm_along_critical_path, ctm_level_spacing, ctm_small_x_delta, ctm_small_x_lambda,
    ctm_spacing_asymptotic, ctm_spacing_batch, principal_regime, CtmParams,
};
pub use formfactor::{
    ff_coupling_lambda, ff_r_shifted, ff_r_theta, two_point_ff, two_point_ff_batch,
    two_point_ff_terms, FfBreakdown, FormFactorTerms,
};
pub use predict::{prediction_table, PredictionRow};
pub use sg::{breather_mass, soliton_mass, vacuum_energy_density, vertex_vev, xi_sg};
