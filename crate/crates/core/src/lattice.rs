//! Hypercubic torus geometry, site indexing and the lattice `L^2`, `L^2_1`
//! norms.

use serde::{Deserialize, Serialize};

use crate::gauge::GaugeField;
use crate::{Error, Result, C64};

/// The torus `(aZ/Z)^d` with `N` sites per direction and `a = 1/N`.
///
/// Boundary phases belong to the geometry: a hop across the seam in
/// direction `j` (from `z_j = N-1` to `z_j = 0`) picks up `exp(i bc_phase[j])`
/// on top of the gauge link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    dim: usize,
    extent: usize,
    bc_phase: Vec<f64>,
    spinor_dim: usize,
}

impl Geometry {
    pub fn new(dim: usize, extent: usize, bc_phase: &[f64], spinor_dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Geometry("dimension must be at least 1".into()));
        }
        if extent < 2 {
            return Err(Error::Geometry(format!("extent N = {extent} must be at least 2")));
        }
        if bc_phase.len() != dim {
            return Err(Error::Geometry(format!("{} boundary phases for dimension {dim}", bc_phase.len())));
        }
        if bc_phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::Geometry("boundary phases must be finite".into()));
        }
        if spinor_dim < 1 {
            return Err(Error::Geometry("spinor dimension must be at least 1".into()));
        }
        extent
            .checked_pow(dim as u32)
            .and_then(|v| v.checked_mul(spinor_dim))
            .ok_or_else(|| Error::Geometry("field dimension overflows".into()))?;
        Ok(Self { dim, extent, bc_phase: bc_phase.to_vec(), spinor_dim })
    }

    pub fn periodic(dim: usize, extent: usize, spinor_dim: usize) -> Result<Self> {
        Self::new(dim, extent, &vec![0.0; dim], spinor_dim)
    }

    /// Same torus with a different number of spinor components.
    pub fn with_spinor_dim(&self, spinor_dim: usize) -> Result<Self> {
        Self::new(self.dim, self.extent, &self.bc_phase, spinor_dim)
    }

    /// Same dimension, boundary phases and spinor size at a different extent.
    pub fn with_extent(&self, extent: usize) -> Result<Self> {
        Self::new(self.dim, extent, &self.bc_phase, self.spinor_dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.extent as f64
    }

    pub fn bc_phase(&self) -> &[f64] {
        &self.bc_phase
    }

    pub fn spinor_dim(&self) -> usize {
        self.spinor_dim
    }

    /// Number of sites, `N^d`.
    pub fn volume(&self) -> usize {
        self.extent.pow(self.dim as u32)
    }

    /// Length of a spinor-valued field, `spinor_dim * N^d`.
    pub fn field_dim(&self) -> usize {
        self.volume() * self.spinor_dim
    }

    fn stride(&self, dir: usize) -> usize {
        self.extent.pow((self.dim - 1 - dir) as u32)
    }

    /// Row-major index of `coords`, each reduced mod `N` first.
    pub fn site_index(&self, coords: &[i64]) -> usize {
        assert_eq!(coords.len(), self.dim, "coordinate count must equal dimension");
        let n = self.extent as i64;
        coords.iter().fold(0usize, |acc, &c| acc * self.extent + c.rem_euclid(n) as usize)
    }

    pub fn site_coords(&self, index: usize) -> Vec<usize> {
        assert!(index < self.volume(), "site index {index} out of range");
        let mut out = vec![0; self.dim];
        let mut rest = index;
        for c in out.iter_mut().rev() {
            *c = rest % self.extent;
            rest /= self.extent;
        }
        out
    }

    pub fn coord(&self, site: usize, dir: usize) -> usize {
        (site / self.stride(dir)) % self.extent
    }

    /// Site reached from `site` by `step` hops in direction `dir`.
    pub fn shift(&self, site: usize, dir: usize, step: isize) -> usize {
        let stride = self.stride(dir);
        let c = (site / stride) % self.extent;
        let moved = (c as isize + step).rem_euclid(self.extent as isize) as usize;
        site + moved * stride - c * stride
    }

    /// Boundary phase picked up by the hop `site -> site + a e_dir`.
    pub fn seam_phase(&self, site: usize, dir: usize) -> f64 {
        if self.coord(site, dir) == self.extent - 1 {
            self.bc_phase[dir]
        } else {
            0.0
        }
    }

    /// Physical position `z a` of a site.
    pub fn position(&self, site: usize) -> Vec<f64> {
        let a = self.spacing();
        self.site_coords(site).into_iter().map(|c| c as f64 * a).collect()
    }
}

/// A spinor-valued field; component `alpha` at site `s` is stored at
/// `s * spinor_dim + alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    values: Vec<C64>,
}

impl LatticeField {
    pub fn zeros(geom: &Geometry) -> Self {
        Self { values: vec![C64::new(0.0, 0.0); geom.field_dim()] }
    }

    pub fn constant(geom: &Geometry, value: C64) -> Self {
        Self { values: vec![value; geom.field_dim()] }
    }

    pub fn from_values(geom: &Geometry, values: Vec<C64>) -> Result<Self> {
        if values.len() != geom.field_dim() {
            return Err(Error::LengthMismatch { expected: geom.field_dim(), got: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("field entries must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn from_real(geom: &Geometry, values: &[f64]) -> Result<Self> {
        Self::from_values(geom, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check(&self, geom: &Geometry) -> Result<()> {
        if self.values.len() != geom.field_dim() {
            return Err(Error::LengthMismatch { expected: geom.field_dim(), got: self.values.len() });
        }
        Ok(())
    }
}

/// Scale `m0` of the `L^2_1` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    m0: f64,
}

impl NormParams {
    pub fn new(m0: f64) -> Result<Self> {
        if m0 == 0.0 || !m0.is_finite() {
            return Err(Error::InvalidArgument(format!("m0 = {m0} must be finite and nonzero")));
        }
        Ok(Self { m0 })
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }
}

impl Default for NormParams {
    fn default() -> Self {
        Self { m0: 1.0 }
    }
}

/// `(a^d sum_z |v(z)|^2)^{1/2}`.
pub fn norm_l2(field: &LatticeField, geom: &Geometry) -> Result<f64> {
    field.check(geom)?;
    Ok(norm_l2_slice(field.values(), geom))
}

pub(crate) fn norm_l2_slice(values: &[C64], geom: &Geometry) -> f64 {
    let ad = geom.spacing().powi(geom.dim() as i32);
    (ad * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// `[ |v|_{L^2}^2 + (a^d / m0^2) sum_z sum_j |(d^f_j v)(z)|^2 ]^{1/2}` with the
/// gauge-covariant forward difference.
pub fn norm_l21(field: &LatticeField, geom: &Geometry, gauge: &GaugeField, params: NormParams) -> Result<f64> {
    field.check(geom)?;
    gauge.check_geometry(geom)?;
    Ok(norm_l21_slice(field.values(), gauge, params))
}

pub(crate) fn norm_l21_slice(values: &[C64], gauge: &GaugeField, params: NormParams) -> f64 {
    let geom = gauge.geometry();
    let a = geom.spacing();
    let ad = a.powi(geom.dim() as i32);
    let s = geom.spinor_dim();
    let mut diff = 0.0;
    for site in 0..geom.volume() {
        for j in 0..geom.dim() {
            let next = geom.shift(site, j, 1);
            let u = gauge.transport(site, j);
            for alpha in 0..s {
                let d = (u * values[next * s + alpha] - values[site * s + alpha]) / a;
                diff += d.norm_sqr();
            }
        }
    }
    let l2 = norm_l2_slice(values, geom);
    (l2 * l2 + ad / (params.m0 * params.m0) * diff).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn geometry_sizes_and_rejections() {
        let g = Geometry::new(2, 4, &[0.0, 0.0], 2).unwrap();
        assert_eq!(g.field_dim(), 32);
        let g1 = Geometry::new(1, 8, &[std::f64::consts::PI], 1).unwrap();
        assert_eq!(g1.field_dim(), 8);
        assert!(Geometry::new(2, 1, &[0.0, 0.0], 2).is_err());
        assert!(Geometry::new(0, 4, &[], 1).is_err());
        assert!(Geometry::new(2, 4, &[0.0], 2).is_err());
    }

    #[test]
    fn site_index_wraps() {
        let g = Geometry::periodic(2, 4, 1).unwrap();
        assert_eq!(g.site_index(&[0, 0]), 0);
        assert_eq!(g.site_index(&[5, 2]), g.site_index(&[1, 2]));
        assert_eq!(g.site_index(&[-1, 0]), g.site_index(&[3, 0]));
        // first coordinate is slowest
        assert_eq!(g.site_index(&[1, 0]), 4);
        assert_eq!(g.site_index(&[0, 1]), 1);
    }

    #[test]
    fn round_trip_small_extents() {
        for n in [2, 3, 4, 8] {
            for d in 1..=3 {
                let g = Geometry::periodic(d, n, 1).unwrap();
                for s in 0..g.volume() {
                    let c: Vec<i64> = g.site_coords(s).iter().map(|&c| c as i64).collect();
                    assert_eq!(g.site_index(&c), s);
                    for j in 0..d {
                        let mut cc = c.clone();
                        cc[j] += 1;
                        assert_eq!(g.shift(s, j, 1), g.site_index(&cc));
                        cc[j] -= 2;
                        assert_eq!(g.shift(s, j, -1), g.site_index(&cc));
                    }
                }
            }
        }
    }

    #[test]
    fn l2_examples() {
        let g = Geometry::periodic(2, 4, 1).unwrap();
        assert!((norm_l2(&LatticeField::constant(&g, c(1.0)), &g).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(norm_l2(&LatticeField::zeros(&g), &g).unwrap(), 0.0);
        let mut v = vec![c(0.0); 16];
        v[5] = c(1.0);
        let f = LatticeField::from_values(&g, v).unwrap();
        assert!((norm_l2(&f, &g).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn l21_constant_and_zero() {
        let g = Geometry::periodic(2, 4, 2).unwrap();
        let gauge = GaugeField::trivial(&g);
        let f = LatticeField::constant(&g, C64::new(0.3, -0.7));
        let l2 = norm_l2(&f, &g).unwrap();
        let l21 = norm_l21(&f, &g, &gauge, NormParams::default()).unwrap();
        assert!((l2 - l21).abs() < 1e-14);
        let z = LatticeField::zeros(&g);
        assert_eq!(norm_l21(&z, &g, &gauge, NormParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn l21_one_hot_hand_sum() {
        // d=1, N=4, a=1/4, delta at z=0. L2^2 = a = 1/4. Nonzero forward
        // differences: at z=0 (-1/a) and at z=3 (+1/a), each squared 16.
        // a/m0^2 * (16 + 16) = 8.
        let g = Geometry::periodic(1, 4, 1).unwrap();
        let gauge = GaugeField::trivial(&g);
        let f = LatticeField::from_real(&g, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let v = norm_l21(&f, &g, &gauge, NormParams::new(1.0).unwrap()).unwrap();
        assert!((v - 8.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn m0_zero_rejected() {
        assert!(NormParams::new(0.0).is_err());
    }

    proptest! {
        #[test]
        fn l2_phase_invariant(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
                              phases in prop::collection::vec(-3.2f64..3.2, 16)) {
            let g = Geometry::periodic(2, 4, 1).unwrap();
            let v: Vec<C64> = vals.iter().map(|&(r, i)| C64::new(r, i)).collect();
            let w: Vec<C64> = v.iter().zip(&phases).map(|(x, &p)| x * C64::from_polar(1.0, p)).collect();
            let a = norm_l2(&LatticeField::from_values(&g, v).unwrap(), &g).unwrap();
            let b = norm_l2(&LatticeField::from_values(&g, w).unwrap(), &g).unwrap();
            prop_assert!((a - b).abs() < 1e-13);
        }

        #[test]
        fn l21_dominates_l2(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
                            m0 in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
                            q in -3i64..=3) {
            let g = Geometry::periodic(2, 4, 2).unwrap();
            let gauge = crate::gauge::uniform_flux_u1(&g, q).unwrap();
            let f = LatticeField::from_values(&g, vals.iter().map(|&(r, i)| C64::new(r, i)).collect()).unwrap();
            let l2 = norm_l2(&f, &g).unwrap();
            let l21 = norm_l21(&f, &g, &gauge, NormParams::new(m0).unwrap()).unwrap();
            prop_assert!(l21 >= l2 - 1e-14);
        }
    }
}
