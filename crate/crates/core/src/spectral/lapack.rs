//! Divide-and-conquer Hermitian eigensolvers from the system LAPACK.
//! Matrices are column-major on both sides, so `DMatrix` storage is passed
//! straight through.

use nalgebra::DMatrix;

use crate::C64;

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
    fn zheevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        lrwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

type Eigen<T> = Option<(Vec<f64>, Option<DMatrix<T>>)>;

fn job(vectors: bool) -> u8 {
    if vectors {
        b'V'
    } else {
        b'N'
    }
}

pub(crate) fn dsyevd(mut a: DMatrix<f64>, vectors: bool) -> Eigen<f64> {
    let n = i32::try_from(a.nrows()).ok()?;
    if n == 0 {
        return Some((Vec::new(), vectors.then_some(a)));
    }
    let jobz = job(vectors);
    let mut w = vec![0.0; a.nrows()];
    let (mut wq, mut iq, mut info) = (0.0f64, 0i32, 0i32);
    // SAFETY: workspace query; every pointer is valid for the sizes LAPACK reads.
    unsafe {
        dsyevd_(&jobz, &b'L', &n, a.as_mut_ptr(), &n, w.as_mut_ptr(), &mut wq, &-1, &mut iq, &-1, &mut info);
    }
    if info != 0 {
        return None;
    }
    let (lwork, liwork) = (wq as i32, iq);
    let mut work = vec![0.0; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    // SAFETY: buffers sized by the query above; `a` is n x n with lda = n.
    unsafe {
        dsyevd_(
            &jobz,
            &b'L',
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    (info == 0).then(|| (w, vectors.then_some(a)))
}

pub(crate) fn zheevd(mut a: DMatrix<C64>, vectors: bool) -> Eigen<C64> {
    let n = i32::try_from(a.nrows()).ok()?;
    if n == 0 {
        return Some((Vec::new(), vectors.then_some(a)));
    }
    let jobz = job(vectors);
    let mut w = vec![0.0; a.nrows()];
    let (mut wq, mut rq, mut iq, mut info) = (C64::new(0.0, 0.0), 0.0f64, 0i32, 0i32);
    // SAFETY: workspace query; every pointer is valid for the sizes LAPACK reads.
    unsafe {
        zheevd_(
            &jobz,
            &b'L',
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            &mut wq,
            &-1,
            &mut rq,
            &-1,
            &mut iq,
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    let (lwork, lrwork, liwork) = (wq.re as i32, rq as i32, iq);
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    // SAFETY: buffers sized by the query above; `a` is n x n with lda = n.
    unsafe {
        zheevd_(
            &jobz,
            &b'L',
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    (info == 0).then(|| (w, vectors.then_some(a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Agreement with nalgebra's implicit QR on a random Hermitian matrix.
    #[test]
    fn matches_nalgebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = &g + g.adjoint();
        let mut ours = zheevd(h.clone(), false).unwrap().0;
        let mut reference: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        reference.sort_by(f64::total_cmp);
        let dev = ours.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-11, "{dev}");

        let s = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 7) % 11) as f64 - 5.0 + (i == j) as u8 as f64);
        let (vals, vecs) = dsyevd(s.clone(), true).unwrap();
        let v = vecs.unwrap();
        let recon = &v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals)) * v.transpose();
        assert!((recon - s).abs().max() < 1e-11);
    }
}
