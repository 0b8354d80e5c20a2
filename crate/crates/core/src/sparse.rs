//! Compressed sparse row matrices for lattice operators.

use std::fmt::Write as _;

use nalgebra::{ComplexField, DMatrix};

use crate::{Error, Result, C64};

/// Scalars the operators are built from: `f64` or [`C64`].
pub trait Entry: ComplexField<RealField = f64> + Copy {
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
    /// Eigenvalues (unsorted) and optionally eigenvectors of a dense
    /// Hermitian matrix from its lower triangle; `None` if the backend
    /// reports failure.
    fn hermitian_eigen(m: DMatrix<Self>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<Self>>)>;
}

#[cfg(not(feature = "lapack"))]
fn nalgebra_eigen<T: Entry>(m: DMatrix<T>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<T>>)> {
    if vectors {
        let e = m.symmetric_eigen();
        Some((e.eigenvalues.iter().copied().collect(), Some(e.eigenvectors)))
    } else {
        Some((m.symmetric_eigenvalues().iter().copied().collect(), None))
    }
}

impl Entry for f64 {
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn hermitian_eigen(m: DMatrix<Self>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<Self>>)> {
        #[cfg(feature = "lapack")]
        return crate::spectral::lapack::dsyevd(m, vectors);
        #[cfg(not(feature = "lapack"))]
        nalgebra_eigen(m, vectors)
    }
}

impl Entry for C64 {
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn hermitian_eigen(m: DMatrix<Self>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<Self>>)> {
        #[cfg(feature = "lapack")]
        return crate::spectral::lapack::zheevd(m, vectors);
        #[cfg(not(feature = "lapack"))]
        nalgebra_eigen(m, vectors)
    }
}

/// Tolerance on `max |M - M^*|` for matrices flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Entry> {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    hermitian: bool,
}

impl<T: Entry> OperatorMatrix<T> {
    /// Duplicates are summed; entries that sum to exactly zero are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                let last = values.len() - 1;
                values[last] += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let zero = T::zero();
        let mut k = 0;
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for r in 0..dim {
            while k < rows.len() && rows[k] == r {
                if values[k] != zero {
                    keep_cols.push(col_idx[k]);
                    keep_vals.push(values[k]);
                }
                k += 1;
            }
            row_ptr[r + 1] = keep_cols.len();
        }
        Self { dim, row_ptr, col_idx: keep_cols, values: keep_vals, hermitian: false }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn from_dense(m: &DMatrix<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator matrices are square");
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                t.push((r, c, m[(r, c)]));
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermitian flag after checking the defect.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::HermiticityDefect(defect));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    /// `max |M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conjugate()).modulus())
            .chain(self.adjoint().triplets().map(|(r, c, v)| (v - self.get(r, c)).modulus()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conjugate())).collect();
        let mut out = Self::from_triplets(self.dim, t);
        out.hermitian = self.hermitian;
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * s)).collect())
    }

    /// `sum_k c_k M_k`.
    pub fn linear_combination(terms: &[(T, &Self)]) -> Self {
        let dim = terms.first().map(|t| t.1.dim).unwrap_or(0);
        let mut t = Vec::new();
        for (s, m) in terms {
            assert_eq!(m.dim, dim, "dimension mismatch in linear combination");
            t.extend(m.triplets().map(|(r, c, v)| (r, c, v * *s)));
        }
        Self::from_triplets(dim, t)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear_combination(&[(T::one(), self), (T::one(), other)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::linear_combination(&[(T::one(), self), (-T::one(), other)])
    }

    /// Sparse product. For a fixed `(i, j)` the inner sum runs over the
    /// column index of `self` in increasing order, so `A A^*` comes out
    /// exactly Hermitian.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in product");
        let mut t = Vec::new();
        let mut acc: Vec<Option<T>> = vec![None; self.dim];
        let mut touched = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.col_idx[k], self.values[k]);
                for kk in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[kk];
                    let p = a * other.values[kk];
                    match &mut acc[c] {
                        Some(v) => *v += p,
                        slot => {
                            *slot = Some(p);
                            touched.push(c);
                        }
                    }
                }
            }
            for c in touched.drain(..) {
                t.push((r, c, acc[c].take().expect("touched slot")));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// `self (x) block` for a dense `block`; with `self` a site operator and
    /// `block` a spinor matrix this matches the spinor-fastest layout.
    pub fn kron_dense(&self, block: &DMatrix<T>) -> Self {
        let (br, bc) = block.shape();
        assert_eq!(br, bc, "spinor block must be square");
        let mut t = Vec::with_capacity(self.nnz() * br * bc);
        for (r, c, v) in self.triplets() {
            for i in 0..br {
                for j in 0..bc {
                    let b = block[(i, j)];
                    if b != T::zero() {
                        t.push((r * br + i, c * bc + j, v * b));
                    }
                }
            }
        }
        Self::from_triplets(self.dim * br, t)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .fold(T::zero(), |acc, k| acc + self.values[k] * x[self.col_idx[k]])
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Debug dump: the dimension on the first line, then one
    /// `row col re im` line per stored entry with 17 significant digits.
    pub fn dump(&self) -> String {
        let mut s = format!("{}\n", self.dim);
        for (r, c, v) in self.triplets() {
            let z = v.to_c64();
            writeln!(s, "{r} {c} {:.16e} {:.16e}", z.re, z.im).expect("write to string");
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let dim: usize = lines
            .next()
            .ok_or_else(|| Error::Format("empty dump".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("dimension: {e}")))?;
        let mut t = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::Format(format!("expected 4 fields in {line:?}")));
            }
            let bad = |e: &dyn std::fmt::Display| Error::Format(format!("{line:?}: {e}"));
            let r: usize = f[0].parse().map_err(|e| bad(&e))?;
            let c: usize = f[1].parse().map_err(|e| bad(&e))?;
            let re: f64 = f[2].parse().map_err(|e| bad(&e))?;
            let im: f64 = f[3].parse().map_err(|e| bad(&e))?;
            if r >= dim || c >= dim {
                return Err(Error::Format(format!("entry ({r}, {c}) outside dimension {dim}")));
            }
            t.push((r, c, T::from_c64(C64::new(re, im))));
        }
        Ok(Self::from_triplets(dim, t))
    }
}

impl OperatorMatrix<f64> {
    pub fn to_complex(&self) -> OperatorMatrix<C64> {
        let mut out = OperatorMatrix::from_triplets(
            self.dim,
            self.triplets().map(|(r, c, v)| (r, c, C64::new(v, 0.0))).collect(),
        );
        out.hermitian = self.hermitian;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = OperatorMatrix::<f64>::from_triplets(3, vec![(0, 1, 1.0), (0, 1, 2.0), (2, 2, 1.0), (2, 2, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(2, 2), 0.0);
    }

    #[test]
    fn hermitian_flag_checked() {
        let i = C64::new(0.0, 1.0);
        let h = OperatorMatrix::from_triplets(2, vec![(0, 1, i), (1, 0, -i)]);
        assert!(h.clone().into_hermitian().unwrap().is_hermitian());
        let nh = OperatorMatrix::from_triplets(2, vec![(0, 1, i), (1, 0, i)]);
        assert!(matches!(nh.into_hermitian(), Err(Error::HermiticityDefect(_))));
    }

    #[test]
    fn kron_layout() {
        let a = OperatorMatrix::<f64>::from_triplets(2, vec![(0, 1, 2.0)]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let k = a.kron_dense(&b).to_dense();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]).kronecker(&b);
        assert_eq!(k, expect);
    }

    #[test]
    fn dump_round_trip() {
        let m = OperatorMatrix::from_triplets(
            3,
            vec![(0, 2, C64::new(0.1, -1.0 / 3.0)), (1, 1, C64::new(std::f64::consts::PI, 0.0))],
        );
        let back = OperatorMatrix::<C64>::parse_dump(&m.dump()).unwrap();
        assert_eq!(back, m);
        assert!(OperatorMatrix::<C64>::parse_dump("2\n0 5 1 0\n").is_err());
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
        prop::collection::vec((-2i32..=2, -2i32..=2), n * n).prop_map(move |v| {
            DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a as f64 * 0.5, b as f64 * 0.25)))
        })
    }

    proptest! {
        #[test]
        fn dense_algebra_agrees(a in arb_matrix(5), b in arb_matrix(5), x in prop::collection::vec(-1.0f64..1.0, 5)) {
            let sa = OperatorMatrix::from_dense(&a);
            let sb = OperatorMatrix::from_dense(&b);
            prop_assert_eq!(sa.matmul(&sb).to_dense(), &a * &b);
            prop_assert_eq!(sa.add(&sb).to_dense(), &a + &b);
            prop_assert_eq!(sa.adjoint().to_dense(), a.adjoint());
            let xv: Vec<C64> = x.iter().map(|&v| C64::new(v, -v)).collect();
            let y = sa.matvec(&xv);
            let yd = &a * nalgebra::DVector::from_vec(xv.clone());
            for (p, q) in y.iter().zip(yd.iter()) {
                prop_assert!((p - q).norm() < 1e-14);
            }
            let g = sa.matmul(&sa.adjoint());
            prop_assert_eq!(g.hermiticity_defect(), 0.0);
        }
    }
}
