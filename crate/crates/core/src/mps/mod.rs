//! Matrix-product states and operators, DMRG and measurements.

mod checkpoint;
mod ed;
mod env;
mod finite;
mod infinite;
mod measure;
mod mpo;
mod schedule;
mod state;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use ed::{exact_ground_state, ExactGroundState};
pub use finite::{expectation_energy, run_finite_dmrg, run_finite_dmrg_report, DmrgResult};
pub use infinite::{run_idmrg, IdmrgResult, IdmrgRun};
pub use measure::{
    correlation_length, entanglement_entropy, entanglement_spectrum, measure_local, measure_product,
    measure_two_point, transfer_spectrum, EntanglementSpectrum, TransferSpectrum,
};
pub use mpo::{nearest_neighbour_bulk, MpoBoundary, MpoOperator};
pub use schedule::{DmrgSchedule, InitialState, SweepParams};
pub use state::{CanonicalForm, MpsState};
