//! Hermitian eigensolves, eta invariants, spectral flow and mod-two flow.

mod eigen;
mod eta;
mod flow;
#[cfg(feature = "lapack")]
pub(crate) mod lapack;
mod mod2;

pub use eigen::{
    eigh_dense, eigs_hermitian, eigs_hermitian_with_cap, eigvals_dense, eigvals_hermitian_dense,
    eigvals_symmetric_dense, residual_spot_check, EigenPairs, DEFAULT_DENSE_CAP,
};
pub use eta::{eta_from_spectrum, eta_invariant, eta_invariant_with_tol, ZERO_TOL};
pub use flow::{
    eta_endpoints, spectral_flow_eta, spectral_flow_tracked, AffineFamily, FlowConfig, HermitianFamily, ReversedFamily,
    SpectralFlowResult,
};
pub use mod2::{mod2_flow, Mod2Config, Mod2FlowResult, RealAffineFamily, RealFamily, VOracle};

/// Which dense Hermitian eigensolver this build uses.
pub const EIGEN_BACKEND: &str = if cfg!(feature = "lapack") { "lapack-dsyevd/zheevd" } else { "nalgebra-qr" };
