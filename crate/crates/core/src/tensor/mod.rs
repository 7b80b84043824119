//! Dense row-major tensors and the three kernels everything else is built on:
//! pairwise contraction, truncated SVD, a Lanczos ground-state solver and a restarted
//! Arnoldi solver for non-Hermitian transfer matrices.

mod arnoldi;
mod dense;
mod lanczos;
mod scalar;
mod svd;

pub use arnoldi::{arnoldi_largest, ArnoldiPair};
pub use dense::{contract, gemm, DenseTensor};
pub(crate) use dense::{gemm_into, permute_data as permute_raw};
pub use lanczos::{lanczos_lowest, lanczos_lowest_report, LanczosReport};
pub use scalar::{Scalar, C64};
pub use svd::{svd_truncate, SvdTruncation, TruncationPolicy};
