use crate::sparse::OperatorMatrix;
use crate::{Error, Result, C64};

/// Default relative zero tolerance: eigenvalues with
/// `|lambda| <= ZERO_TOL * |M|` count as kernel.
pub const ZERO_TOL: f64 = 1e-10;

/// `#positive - #negative` for an ascending spectrum; `zero_tol` is relative
/// to the spectral radius.
pub fn eta_from_spectrum(eigs: &[f64], zero_tol: f64) -> Result<i64> {
    let radius = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = zero_tol * radius;
    let mut pos = 0i64;
    let mut neg = 0i64;
    for &e in eigs {
        if e.abs() <= tol {
            return Err(Error::Kernel(e.abs()));
        }
        if e > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok(pos - neg)
}

pub fn eta_invariant(m: &OperatorMatrix<C64>) -> Result<i64> {
    eta_invariant_with_tol(m, ZERO_TOL)
}

pub fn eta_invariant_with_tol(m: &OperatorMatrix<C64>, zero_tol: f64) -> Result<i64> {
    eta_from_spectrum(&super::eigs_hermitian(m)?, zero_tol)
}
