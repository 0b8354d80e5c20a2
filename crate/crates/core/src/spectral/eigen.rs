use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::{Entry, OperatorMatrix};
use crate::{Error, Result, C64};

/// Largest dimension handed to the dense solver by default.
pub const DEFAULT_DENSE_CAP: usize = 10_000;

fn eigen_any<T: Entry>(m: DMatrix<T>, vectors: bool) -> (Vec<f64>, Option<DMatrix<T>>) {
    match T::hermitian_eigen(m.clone(), vectors) {
        Some(r) => r,
        // the LAPACK driver only fails on non-convergence; retry with nalgebra
        None if vectors => {
            let e = m.symmetric_eigen();
            (e.eigenvalues.iter().copied().collect(), Some(e.eigenvectors))
        }
        None => (m.symmetric_eigenvalues().iter().copied().collect(), None),
    }
}

/// Ascending eigenvalues of a dense Hermitian (or real symmetric) matrix.
/// Only the lower triangle is read.
pub fn eigvals_dense<T: Entry>(m: DMatrix<T>) -> Vec<f64> {
    let mut v = eigen_any(m, false).0;
    v.sort_by(f64::total_cmp);
    v
}

pub fn eigvals_hermitian_dense(m: DMatrix<C64>) -> Vec<f64> {
    eigvals_dense(m)
}

pub fn eigvals_symmetric_dense(m: DMatrix<f64>) -> Vec<f64> {
    eigvals_dense(m)
}

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct EigenPairs<T: Entry> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

pub fn eigh_dense<T: Entry>(m: DMatrix<T>) -> EigenPairs<T> {
    let (vals, vecs) = eigen_any(m, true);
    let vecs = vecs.expect("vectors requested");
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = order.iter().map(|&k| vals[k]).collect();
    let vectors = DMatrix::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);
    EigenPairs { values, vectors }
}

/// Largest `|M v - lambda v| / |M|` over `count` randomly chosen pairs,
/// with `|M|` the spectral radius.
pub fn residual_spot_check<T: Entry>(m: &OperatorMatrix<T>, pairs: &EigenPairs<T>, count: usize, seed: u64) -> f64 {
    let n = pairs.values.len();
    if n == 0 {
        return 0.0;
    }
    let scale = pairs.values[0].abs().max(pairs.values[n - 1].abs()).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(0..n);
            let v: Vec<T> = pairs.vectors.column(k).iter().copied().collect();
            let mv = DVector::from_vec(m.matvec(&v));
            let lv = DVector::from_vec(v).map(|x| x * T::from_real(pairs.values[k]));
            (mv - lv).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// Ascending eigenvalues of a Hermitian operator, densely.
pub fn eigs_hermitian(m: &OperatorMatrix<C64>) -> Result<Vec<f64>> {
    eigs_hermitian_with_cap(m, DEFAULT_DENSE_CAP)
}

pub fn eigs_hermitian_with_cap<T: Entry>(m: &OperatorMatrix<T>, cap: usize) -> Result<Vec<f64>> {
    check(m, cap)?;
    Ok(eigvals_dense(m.to_dense()))
}

impl<T: Entry> EigenPairs<T> {
    /// Full decomposition with the residual of 5 random pairs checked
    /// against `1e-9 |M|`.
    pub fn compute(m: &OperatorMatrix<T>, cap: usize) -> Result<Self> {
        check(m, cap)?;
        let pairs = eigh_dense(m.to_dense());
        let residual = residual_spot_check(m, &pairs, 5, m.dim() as u64);
        if residual > 1e-9 {
            return Err(Error::EigenResidual { residual, tolerance: 1e-9 });
        }
        Ok(pairs)
    }
}

fn check<T: Entry>(m: &OperatorMatrix<T>, cap: usize) -> Result<()> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    if m.dim() > cap {
        return Err(Error::DimensionOverCap { dim: m.dim(), cap });
    }
    Ok(())
}
