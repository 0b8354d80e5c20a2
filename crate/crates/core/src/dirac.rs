//! Difference operators, naive and Wilson Dirac operators and the
//! domain-wall families built on them.
//!
//! All operators act on spinor-valued fields in the layout of
//! [`crate::lattice`]; as matrices they are `site_operator (x) spinor_matrix`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{CliffordMode, CliffordRep};
use crate::gauge::GaugeField;
use crate::lattice::{norm_l2_slice, Geometry};
use crate::sparse::OperatorMatrix;
use crate::spectral::{HermitianFamily, RealFamily};
use crate::wall::{check_t, kappa_t_value, DomainWall};
use crate::{Error, Result, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(d^f_j u)(z) = [U_j(z) u(z + a e_j) - u(z)] / a` on scalar site fields.
fn site_forward(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    let inv_a = 1.0 / g.spacing();
    let mut t = Vec::with_capacity(2 * g.volume());
    for z in 0..g.volume() {
        t.push((z, z, re(-inv_a)));
        t.push((z, g.shift(z, j, 1), gauge.transport(z, j) * inv_a));
    }
    OperatorMatrix::from_triplets(g.volume(), t)
}

/// `(d^b_j u)(z) = [u(z) - U_j(z - a e_j)^{-1} u(z - a e_j)] / a`.
fn site_backward(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    let inv_a = 1.0 / g.spacing();
    let mut t = Vec::with_capacity(2 * g.volume());
    for z in 0..g.volume() {
        let prev = g.shift(z, j, -1);
        t.push((z, z, re(inv_a)));
        t.push((z, prev, -gauge.transport(prev, j).conj() * inv_a));
    }
    OperatorMatrix::from_triplets(g.volume(), t)
}

/// Skew-adjoint `(F - F^*) / 2`, built from `F` alone so skewness is exact.
fn site_central(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let f = site_forward(gauge, j);
    OperatorMatrix::linear_combination(&[(re(0.5), &f), (re(-0.5), &f.adjoint())])
}

/// `(a/2) sum_j F_j F_j^*` on scalar site fields.
fn site_wilson(gauge: &GaugeField) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    let mut acc = OperatorMatrix::zeros(g.volume());
    for j in 0..g.dim() {
        let f = site_forward(gauge, j);
        acc = acc.add(&f.matmul(&f.adjoint()));
    }
    acc.scale(re(0.5 * g.spacing()))
}

fn spinor_identity(g: &Geometry) -> DMatrix<C64> {
    DMatrix::identity(g.spinor_dim(), g.spinor_dim())
}

pub fn forward_difference_matrix(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    site_forward(gauge, j).kron_dense(&spinor_identity(g))
}

pub fn backward_difference_matrix(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    site_backward(gauge, j).kron_dense(&spinor_identity(g))
}

/// `(d^f_j + d^b_j) / 2`.
pub fn central_difference_matrix(gauge: &GaugeField, j: usize) -> OperatorMatrix<C64> {
    let f = forward_difference_matrix(gauge, j);
    let b = backward_difference_matrix(gauge, j);
    OperatorMatrix::linear_combination(&[(re(0.5), &f), (re(0.5), &b)])
}

fn check_rep(gauge: &GaugeField, rep: &CliffordRep, mode: CliffordMode) -> Result<()> {
    let g = gauge.geometry();
    if rep.mode() != mode {
        return Err(Error::Clifford(format!("{mode:?} operator with a {:?} representation", rep.mode())));
    }
    if rep.dim() != g.dim() || rep.spinor_dim() != g.spinor_dim() {
        return Err(Error::Clifford(format!(
            "representation (d = {}, spinors {}) does not match geometry (d = {}, spinors {})",
            rep.dim(),
            rep.spinor_dim(),
            g.dim(),
            g.spinor_dim()
        )));
    }
    Ok(())
}

/// `D^naive = sum_j sigma(e_j) (x) d_j`, Hermitian.
pub fn naive_dirac(gauge: &GaugeField, rep: &CliffordRep) -> Result<OperatorMatrix<C64>> {
    check_rep(gauge, rep, CliffordMode::ComplexEven)?;
    let g = gauge.geometry();
    let mut acc = OperatorMatrix::zeros(g.field_dim());
    for j in 0..g.dim() {
        acc = acc.add(&site_central(gauge, j).kron_dense(rep.sigma(j)));
    }
    acc.into_hermitian()
}

/// `W = (a/2) sum_j d^f_j (d^f_j)^*`, positive semidefinite.
pub fn wilson_term(gauge: &GaugeField) -> OperatorMatrix<C64> {
    let g = gauge.geometry();
    site_wilson(gauge).kron_dense(&spinor_identity(g)).into_hermitian().expect("F F^* is exactly Hermitian")
}

/// `D^W = D^naive + gamma W`.
pub fn wilson_dirac(gauge: &GaugeField, rep: &CliffordRep) -> Result<OperatorMatrix<C64>> {
    let naive = naive_dirac(gauge, rep)?;
    let gamma = rep.gamma().expect("complex mode carries a grading");
    naive.add(&site_wilson(gauge).kron_dense(gamma)).into_hermitian()
}

/// Real `D^W = sum_j sigma(eps_j) d_j + W` for odd d; every transport
/// (links and boundary phases) must be `+-1`.
pub fn wilson_dirac_real(gauge: &GaugeField, rep: &CliffordRep) -> Result<OperatorMatrix<f64>> {
    check_rep(gauge, rep, CliffordMode::RealOdd)?;
    let (defect, site, dir) = gauge.realness_defect();
    if defect > 1e-12 {
        return Err(Error::ComplexLink { site, dir, phase: gauge.transport_phase(site, dir) });
    }
    let g = gauge.geometry();
    let real = |m: &OperatorMatrix<C64>| {
        OperatorMatrix::from_triplets(m.dim(), m.triplets().map(|(r, c, v)| (r, c, v.re)).collect())
    };
    let mut acc = real(&site_wilson(gauge)).kron_dense(&DMatrix::identity(g.spinor_dim(), g.spinor_dim()));
    for j in 0..g.dim() {
        acc = acc.add(&real(&site_central(gauge, j)).kron_dense(&rep.sigma_real(j)));
    }
    Ok(acc)
}

/// Mass `m > 0` and wall profile of a domain-wall family.
#[derive(Debug, Clone)]
pub struct MassFamilyParams {
    m: f64,
    wall: DomainWall,
}

impl MassFamilyParams {
    pub fn new(m: f64, wall: DomainWall) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("mass m = {m} must be positive")));
        }
        Ok(Self { m, wall })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn wall(&self) -> &DomainWall {
        &self.wall
    }
}

fn mass_term(kt: &[f64], m: f64, block: &DMatrix<C64>) -> OperatorMatrix<C64> {
    OperatorMatrix::diagonal(&kt.iter().map(|k| re(-m * k)).collect::<Vec<_>>()).kron_dense(block)
}

/// `h(t) = D^W - m diag(kappa_t) gamma`.
pub fn dw_operator(
    gauge: &GaugeField,
    rep: &CliffordRep,
    params: &MassFamilyParams,
    t: f64,
) -> Result<OperatorMatrix<C64>> {
    check_t(t)?;
    let dw = wilson_dirac(gauge, rep)?;
    let kt = crate::wall::kappa_t(&params.wall, t)?;
    let gamma = rep.gamma().expect("complex mode carries a grading");
    dw.add(&mass_term(&kt, params.m, gamma)).into_hermitian()
}

/// `A(t) = D^W - m diag(kappa_t)` for the real odd-dimensional operator.
pub fn dw_operator_real(
    gauge: &GaugeField,
    rep: &CliffordRep,
    params: &MassFamilyParams,
    t: f64,
) -> Result<OperatorMatrix<f64>> {
    check_t(t)?;
    let dw = wilson_dirac_real(gauge, rep)?;
    let s = rep.spinor_dim();
    let kt = crate::wall::kappa_t(&params.wall, t)?;
    let diag: Vec<f64> = kt.iter().flat_map(|k| std::iter::repeat_n(-params.m * k, s)).collect();
    Ok(dw.add(&OperatorMatrix::diagonal(&diag)))
}

/// `H = [[0, A], [A^T, 0]]`, real symmetric with spectrum `+-svd(A)`.
pub fn doubled_hermitian(a: &OperatorMatrix<f64>) -> OperatorMatrix<f64> {
    let n = a.dim();
    let mut t = Vec::with_capacity(2 * a.nnz());
    for (r, c, v) in a.triplets() {
        t.push((r, n + c, v));
        t.push((n + c, r, v));
    }
    OperatorMatrix::from_triplets(2 * n, t).into_hermitian().expect("symmetric by construction")
}

/// Largest observed `[sum_j |d^f_j phi|^2 - 2 |D^W phi|^2] / |phi|^2` over
/// random `phi`; a finite bound is the lattice elliptic estimate.
pub fn elliptic_estimate(gauge: &GaugeField, rep: &CliffordRep, samples: usize, seed: u64) -> Result<f64> {
    let dw = wilson_dirac(gauge, rep)?;
    let g = gauge.geometry();
    let forwards: Vec<_> = (0..g.dim()).map(|j| forward_difference_matrix(gauge, j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi: Vec<C64> =
            (0..g.field_dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm2 = norm_l2_slice(&phi, g).powi(2);
        let grad: f64 = forwards.iter().map(|f| norm_l2_slice(&f.matvec(&phi), g).powi(2)).sum();
        let dphi = norm_l2_slice(&dw.matvec(&phi), g).powi(2);
        worst = worst.max((grad - 2.0 * dphi) / norm2);
    }
    Ok(worst)
}

/// The Hermitian family `t -> D - m diag(kappa_t) gamma` for a given
/// Hermitian base operator `D` (normally [`wilson_dirac`]).
#[derive(Debug, Clone)]
pub struct DwFamily {
    base: DMatrix<C64>,
    gamma: DMatrix<C64>,
    kappa: Vec<f64>,
    m: f64,
}

impl DwFamily {
    pub fn new(base: &OperatorMatrix<C64>, gamma: &DMatrix<C64>, params: &MassFamilyParams) -> Result<Self> {
        if !base.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let s = gamma.nrows();
        let kappa = params.wall.kappa().to_vec();
        if kappa.len() * s != base.dim() {
            return Err(Error::LengthMismatch { expected: base.dim(), got: kappa.len() * s });
        }
        Ok(Self { base: base.to_dense(), gamma: gamma.clone(), kappa, m: params.m })
    }

    pub fn wilson(gauge: &GaugeField, rep: &CliffordRep, params: &MassFamilyParams) -> Result<Self> {
        let dw = wilson_dirac(gauge, rep)?;
        Self::new(&dw, rep.gamma().expect("complex mode carries a grading"), params)
    }

    pub fn mass(&self) -> f64 {
        self.m
    }
}

impl HermitianFamily for DwFamily {
    fn dim(&self) -> usize {
        self.base.nrows()
    }

    fn eval(&self, t: f64) -> DMatrix<C64> {
        let s = self.gamma.nrows();
        let mut h = self.base.clone();
        for (site, &k) in self.kappa.iter().enumerate() {
            let c = -self.m * kappa_t_value(k, t);
            for a in 0..s {
                for b in 0..s {
                    h[(site * s + a, site * s + b)] += self.gamma[(a, b)] * c;
                }
            }
        }
        h
    }

    /// `dh/dt = -m diag((1 + kappa)/2) gamma` and `gamma` is unitary.
    fn lipschitz(&self) -> f64 {
        let top = self.kappa.iter().map(|k| (0.5 * (1.0 + k)).abs()).fold(0.0, f64::max);
        self.m * top
    }
}

/// The real family `t -> D - m diag(kappa_t)` of the odd-dimensional case.
#[derive(Debug, Clone)]
pub struct RealDwFamily {
    base: DMatrix<f64>,
    spinor_dim: usize,
    kappa: Vec<f64>,
    m: f64,
}

impl RealDwFamily {
    pub fn new(gauge: &GaugeField, rep: &CliffordRep, params: &MassFamilyParams) -> Result<Self> {
        let dw = wilson_dirac_real(gauge, rep)?;
        Ok(Self { base: dw.to_dense(), spinor_dim: rep.spinor_dim(), kappa: params.wall.kappa().to_vec(), m: params.m })
    }
}

impl RealFamily for RealDwFamily {
    fn dim(&self) -> usize {
        self.base.nrows()
    }

    fn eval(&self, t: f64) -> DMatrix<f64> {
        let mut a = self.base.clone();
        for (site, &k) in self.kappa.iter().enumerate() {
            let c = -self.m * kappa_t_value(k, t);
            for s in 0..self.spinor_dim {
                let i = site * self.spinor_dim + s;
                a[(i, i)] += c;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::clifford_rep;
    use crate::gauge::{add_link_noise, random_gauge_transform, trivial_gauge, uniform_flux_u1, wilson_line_gauge};
    use crate::spectral::{eigvals_hermitian_dense, eigvals_symmetric_dense};
    use crate::wall::{domain_wall_profile, RegionSpec};
    use std::f64::consts::PI;

    fn geom2(n: usize, bc: [f64; 2]) -> Geometry {
        Geometry::new(2, n, &bc, 2).unwrap()
    }

    fn rep2() -> CliffordRep {
        clifford_rep(2, CliffordMode::ComplexEven).unwrap()
    }

    fn max_dev(a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn rough_gauge(n: usize, bc: [f64; 2], seed: u64) -> GaugeField {
        let g = geom2(n, bc);
        let u = uniform_flux_u1(&g, 1).unwrap();
        add_link_noise(&random_gauge_transform(&u, seed).0, 0.05, seed + 1).unwrap()
    }

    /// Momenta `p_j = (2 pi k_j + bc_j) / N` of the free torus.
    fn momenta(n: usize, bc: &[f64]) -> Vec<Vec<f64>> {
        let d = bc.len();
        let mut out = vec![vec![]];
        for j in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..n).map(move |k| {
                        let mut q = p.clone();
                        q.push((2.0 * PI * k as f64 + bc[j]) / n as f64);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn forward_difference_of_delta() {
        let g = Geometry::periodic(1, 4, 1).unwrap();
        let f = forward_difference_matrix(&trivial_gauge(&g), 0);
        let u = f.matvec(&[re(1.0), re(0.0), re(0.0), re(0.0)]);
        assert_eq!(u[3], re(4.0));
        assert_eq!(u[0], re(-4.0));
        let c = f.matvec(&[re(1.0); 4]);
        assert!(c.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn backward_is_minus_forward_adjoint() {
        let gauge = rough_gauge(4, [0.0, PI], 3);
        for j in 0..2 {
            let f = forward_difference_matrix(&gauge, j);
            let b = backward_difference_matrix(&gauge, j);
            let diff = b.add(&f.adjoint());
            assert!(diff.max_abs() <= 1e-15, "j = {j}: {}", diff.max_abs());
            let c = central_difference_matrix(&gauge, j);
            assert!(c.add(&c.adjoint()).max_abs() <= 1e-15);
        }
    }

    #[test]
    fn chirality_and_wilson_commutation() {
        let gauge = rough_gauge(4, [0.3, 0.0], 5);
        let rep = rep2();
        let gamma = OperatorMatrix::identity(16).kron_dense(rep.gamma().unwrap());
        let naive = naive_dirac(&gauge, &rep).unwrap();
        let w = wilson_term(&gauge);
        assert!(gamma.matmul(&naive).add(&naive.matmul(&gamma)).max_abs() <= 1e-13);
        assert!(gamma.matmul(&w).sub(&w.matmul(&gamma)).max_abs() <= 1e-13);
        let ev = eigvals_hermitian_dense(w.to_dense());
        assert!(ev[0] >= -1e-13);
        let dw = wilson_dirac(&gauge, &rep).unwrap();
        assert!(dw.hermiticity_defect() <= 1e-13);
    }

    #[test]
    fn naive_spectrum_is_chiral_and_doubled() {
        let g = geom2(4, [0.0, 0.0]);
        let naive = naive_dirac(&trivial_gauge(&g), &rep2()).unwrap();
        let ev = eigvals_hermitian_dense(naive.to_dense());
        let neg: Vec<f64> = sorted(ev.iter().map(|x| -x).collect());
        assert!(max_dev(&ev, &neg) < 1e-12);
        // zero modes at momenta with all sin = 0: 2^d momenta, 2 spinors each
        assert_eq!(ev.iter().filter(|x| x.abs() < 1e-10).count(), 8);
        let a = 0.25;
        let oracle = sorted(
            momenta(4, &[0.0, 0.0])
                .iter()
                .flat_map(|p| {
                    let r = (p[0].sin().powi(2) + p[1].sin().powi(2)).sqrt() / a;
                    [r, -r]
                })
                .collect(),
        );
        assert!(max_dev(&ev, &oracle) < 1e-10);
    }

    #[test]
    fn free_wilson_matches_fourier_oracle() {
        for (n, bc) in [(4, [0.0, 0.0]), (8, [PI, 0.0]), (4, [0.7, -1.1])] {
            let g = geom2(n, bc);
            let a = 1.0 / n as f64;
            let dw = wilson_dirac(&trivial_gauge(&g), &rep2()).unwrap();
            let ev = eigvals_hermitian_dense(dw.to_dense());
            let oracle = sorted(
                momenta(n, &bc)
                    .iter()
                    .flat_map(|p| {
                        let s2: f64 = p.iter().map(|x| x.sin().powi(2)).sum();
                        let w: f64 = p.iter().map(|x| 1.0 - x.cos()).sum();
                        let r = (s2 + w * w).sqrt() / a;
                        [r, -r]
                    })
                    .collect(),
            );
            assert!(max_dev(&ev, &oracle) < 1e-10, "n = {n}, bc = {bc:?}");
        }
    }

    #[test]
    fn free_wilson_term_d1() {
        let n = 8;
        let g = Geometry::periodic(1, n, 1).unwrap();
        let ev = eigvals_hermitian_dense(wilson_term(&trivial_gauge(&g)).to_dense());
        let oracle = sorted((0..n).map(|k| n as f64 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos())).collect());
        assert!(max_dev(&ev, &oracle) < 1e-12);
    }

    #[test]
    fn gauge_covariance_of_spectrum() {
        for n in [4, 8] {
            let g = geom2(n, [0.0, PI]);
            let u = add_link_noise(&uniform_flux_u1(&g, 2).unwrap(), 0.05, 9).unwrap();
            let (v, _) = random_gauge_transform(&u, 10);
            let a = eigvals_hermitian_dense(wilson_dirac(&u, &rep2()).unwrap().to_dense());
            let b = eigvals_hermitian_dense(wilson_dirac(&v, &rep2()).unwrap().to_dense());
            assert!(max_dev(&a, &b) <= 1e-10);
        }
    }

    #[test]
    fn real_free_operator_d1() {
        let n = 8;
        let rep = clifford_rep(1, CliffordMode::RealOdd).unwrap();
        let g = Geometry::periodic(1, n, 1).unwrap();
        let d = wilson_dirac_real(&trivial_gauge(&g), &rep).unwrap();
        let ev = d.to_dense().complex_eigenvalues();
        for k in 0..n {
            let p = 2.0 * PI * k as f64 / n as f64;
            let z = C64::new((1.0 - p.cos()) * n as f64, p.sin() * n as f64);
            assert!(ev.iter().any(|e| (e - z).norm() < 1e-10), "missing {z}");
        }
        // antisymmetric part is the naive term
        let naive = OperatorMatrix::from_triplets(
            n,
            crate::dirac::site_central(&trivial_gauge(&g), 0).triplets().map(|(r, c, v)| (r, c, v.re)).collect(),
        );
        let anti = OperatorMatrix::linear_combination(&[(0.5, &d), (-0.5, &d.transpose())]);
        assert!(anti.sub(&naive).max_abs() == 0.0);
    }

    #[test]
    fn real_operator_rejects_complex_links() {
        let rep = clifford_rep(1, CliffordMode::RealOdd).unwrap();
        let g = Geometry::periodic(1, 8, 1).unwrap();
        let u = wilson_line_gauge(&g, &[0.4]).unwrap();
        assert!(matches!(wilson_dirac_real(&u, &rep), Err(Error::ComplexLink { .. })));
        let flip = wilson_line_gauge(&g, &[8.0 * PI]).unwrap();
        assert!(wilson_dirac_real(&flip, &rep).is_ok());
        let anti = Geometry::new(1, 8, &[PI], 1).unwrap();
        assert!(wilson_dirac_real(&trivial_gauge(&anti), &rep).is_ok());
    }

    #[test]
    fn dw_endpoints_and_affinity() {
        let g = geom2(4, [0.0, PI]);
        let gauge = rough_gauge(4, [0.0, PI], 21);
        let rep = rep2();
        let wall = domain_wall_profile(&g, &RegionSpec::Band { lo: 0.25, hi: 0.75 }).unwrap();
        let params = MassFamilyParams::new(1.3, wall).unwrap();
        let dw = wilson_dirac(&gauge, &rep).unwrap();
        let gamma = OperatorMatrix::identity(16).kron_dense(rep.gamma().unwrap());
        let hm = dw_operator(&gauge, &rep, &params, -1.0).unwrap();
        assert!(hm.sub(&dw.add(&gamma.scale(re(1.3)))).max_abs() <= 1e-13);
        let hp = dw_operator(&gauge, &rep, &params, 1.0).unwrap();
        let fam = DwFamily::wilson(&gauge, &rep, &params).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.55, 1.0] {
            let h = dw_operator(&gauge, &rep, &params, t).unwrap();
            let lin = OperatorMatrix::linear_combination(&[(re(0.5 * (1.0 - t)), &hm), (re(0.5 * (1.0 + t)), &hp)]);
            assert!(h.sub(&lin).max_abs() <= 1e-13, "t = {t}");
            assert!((h.to_dense() - fam.eval(t)).iter().all(|z| z.norm() <= 1e-13));
        }
        assert!(matches!(dw_operator(&gauge, &rep, &params, 1.01), Err(Error::ParameterOutOfRange(_))));
        assert_eq!(fam.lipschitz(), 1.3);

        let whole = domain_wall_profile(&g, &RegionSpec::WholeTorus).unwrap();
        let pw = MassFamilyParams::new(1.3, whole).unwrap();
        let h1 = dw_operator(&gauge, &rep, &pw, 1.0).unwrap();
        assert!(h1.sub(&dw.sub(&gamma.scale(re(1.3)))).max_abs() <= 1e-13);
    }

    #[test]
    fn doubled_spectrum_is_plus_minus_singular_values() {
        let n = 8;
        let rep = clifford_rep(1, CliffordMode::RealOdd).unwrap();
        let g = Geometry::periodic(1, n, 1).unwrap();
        let gauge = trivial_gauge(&g);
        let wall = domain_wall_profile(&g, &RegionSpec::WholeTorus).unwrap();
        let params = MassFamilyParams::new(1.0, wall).unwrap();
        let a = dw_operator_real(&gauge, &rep, &params, 0.3).unwrap();
        let h = doubled_hermitian(&a);
        assert_eq!(h.sub(&h.transpose()).max_abs(), 0.0);
        let ev = eigvals_symmetric_dense(h.to_dense());
        let sv = a.to_dense().svd(false, false).singular_values;
        let oracle = sorted(sv.iter().flat_map(|s| [*s, -*s]).collect());
        assert!(max_dev(&ev, &oracle) < 1e-10);
        let am = dw_operator_real(&gauge, &rep, &params, -1.0).unwrap();
        assert!(am.to_dense().determinant() > 0.0);
    }

    #[test]
    fn elliptic_ratio_is_finite() {
        let gauge = rough_gauge(4, [0.0, 0.0], 2);
        let c = elliptic_estimate(&gauge, &rep2(), 20, 1).unwrap();
        assert!(c.is_finite());
    }

    #[test]
    fn rep_mismatch_rejected() {
        let g = Geometry::periodic(2, 4, 4).unwrap();
        assert!(matches!(wilson_dirac(&trivial_gauge(&g), &rep2()), Err(Error::Clifford(_))));
        let rep = clifford_rep(1, CliffordMode::RealOdd).unwrap();
        assert!(naive_dirac(&trivial_gauge(&geom2(4, [0.0, 0.0])), &rep).is_err());
    }
}
