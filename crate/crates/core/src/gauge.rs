//! U(1) link variables, standard backgrounds, plaquettes and topological
//! charge.
//!
//! Links are stored as phases `theta_j(z)`; the link value is
//! `exp(i theta_j(z))` and transports `u(z + a e_j)` back to `z` in the
//! forward difference. Geometry boundary phases are applied on top by
//! [`GaugeField::transport`].

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::Geometry;
use crate::{Error, Result, C64, TAU};

/// Identifier of the pseudo-random generator, written into gauge files.
pub const GENERATOR_TAG: &str = "rand_chacha-0.9/ChaCha8Rng/seed_from_u64";

/// Phase reduced to the principal branch `(-pi, pi]`.
pub fn principal(phase: f64) -> f64 {
    let y = phase.rem_euclid(TAU);
    if y > std::f64::consts::PI {
        y - TAU
    } else {
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    geometry: Geometry,
    // site-major, direction-minor
    phases: Vec<f64>,
}

impl GaugeField {
    pub fn trivial(geom: &Geometry) -> Self {
        Self { geometry: geom.clone(), phases: vec![0.0; geom.volume() * geom.dim()] }
    }

    pub fn from_phases(geom: &Geometry, phases: Vec<f64>) -> Result<Self> {
        let expected = geom.volume() * geom.dim();
        if phases.len() != expected {
            return Err(Error::LengthMismatch { expected, got: phases.len() });
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("link phases must be finite".into()));
        }
        Ok(Self { geometry: geom.clone(), phases })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, site: usize, dir: usize) -> f64 {
        self.phases[site * self.geometry.dim() + dir]
    }

    /// Gauge link `U_j(z)` without boundary phase.
    pub fn link(&self, site: usize, dir: usize) -> C64 {
        C64::from_polar(1.0, self.phase(site, dir))
    }

    /// Full phase of the hop `z -> z + a e_j`: link plus seam phase.
    pub fn transport_phase(&self, site: usize, dir: usize) -> f64 {
        self.phase(site, dir) + self.geometry.seam_phase(site, dir)
    }

    pub fn transport(&self, site: usize, dir: usize) -> C64 {
        C64::from_polar(1.0, self.transport_phase(site, dir))
    }

    /// Same links on a geometry that differs only in spinor size.
    pub fn with_geometry(&self, geom: &Geometry) -> Result<Self> {
        if geom.dim() != self.geometry.dim()
            || geom.extent() != self.geometry.extent()
            || geom.bc_phase() != self.geometry.bc_phase()
        {
            return Err(Error::Geometry("target geometry is a different torus".into()));
        }
        Ok(Self { geometry: geom.clone(), phases: self.phases.clone() })
    }

    pub(crate) fn check_geometry(&self, geom: &Geometry) -> Result<()> {
        if geom.dim() != self.geometry.dim()
            || geom.extent() != self.geometry.extent()
            || geom.bc_phase() != self.geometry.bc_phase()
        {
            return Err(Error::Geometry("gauge field lives on a different torus".into()));
        }
        Ok(())
    }

    /// Largest distance of any transport (links times seam phases) from
    /// the real axis, measured as `|sin(phase)|`.
    pub fn realness_defect(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for site in 0..self.geometry.volume() {
            for dir in 0..self.geometry.dim() {
                let s = self.transport_phase(site, dir).sin().abs();
                if s > worst.0 {
                    worst = (s, site, dir);
                }
            }
        }
        worst
    }
}

/// All links equal to one.
pub fn trivial_gauge(geom: &Geometry) -> GaugeField {
    GaugeField::trivial(geom)
}

/// Landau-gauge background in d=2 whose plaquette phase depends only on the
/// first coordinate: `p(c) = 2 pi Q w(c) / (N sum w)`. Total flux is
/// `2 pi Q`. Uniform weights give [`uniform_flux_u1`].
pub fn column_flux_u1(geom: &Geometry, q: i64, weights: &[f64]) -> Result<GaugeField> {
    if geom.dim() != 2 {
        return Err(Error::Geometry("flux backgrounds need d = 2".into()));
    }
    let n = geom.extent();
    if weights.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: weights.len() });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument("column weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("column weights sum to zero".into()));
    }
    let p: Vec<f64> = weights.iter().map(|w| TAU * q as f64 * w / (n as f64 * total)).collect();
    if p.iter().any(|x| x.abs() >= std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("charge {q} puts a plaquette phase outside the principal branch")));
    }
    // P(n1) = sum_{c < n1} p(c)
    let mut cumulative = vec![0.0; n];
    for c in 1..n {
        cumulative[c] = cumulative[c - 1] + p[c - 1];
    }
    let mut phases = vec![0.0; geom.volume() * 2];
    for site in 0..geom.volume() {
        let n1 = geom.coord(site, 0);
        let n2 = geom.coord(site, 1);
        phases[site * 2] = -p[n1] * n2 as f64;
        if n2 == n - 1 {
            phases[site * 2 + 1] = n as f64 * cumulative[n1];
        }
    }
    GaugeField::from_phases(geom, phases)
}

/// Constant-curvature background in d=2: every plaquette phase is
/// `2 pi Q / N^2`.
pub fn uniform_flux_u1(geom: &Geometry, q: i64) -> Result<GaugeField> {
    let n = geom.extent() as i64;
    if geom.dim() == 2 && 2 * q.abs() >= n * n {
        return Err(Error::InvalidArgument(format!("|Q| = {} must stay below N^2/2 = {}", q.abs(), n * n / 2)));
    }
    column_flux_u1(geom, q, &vec![1.0; geom.extent()])
}

/// Flux `2 pi Q` spread evenly over the columns `lo <= n_1 < hi`.
pub fn localized_flux_u1(geom: &Geometry, q: i64, lo: usize, hi: usize) -> Result<GaugeField> {
    if lo >= hi || hi > geom.extent() {
        return Err(Error::InvalidArgument(format!("empty column range {lo}..{hi}")));
    }
    let weights: Vec<f64> = (0..geom.extent()).map(|c| if (lo..hi).contains(&c) { 1.0 } else { 0.0 }).collect();
    column_flux_u1(geom, q, &weights)
}

/// Flat background with holonomy `exp(i alpha_j)` around direction `j`:
/// every link is `exp(i alpha_j / N)`.
pub fn wilson_line_gauge(geom: &Geometry, alpha: &[f64]) -> Result<GaugeField> {
    if alpha.len() != geom.dim() {
        return Err(Error::LengthMismatch { expected: geom.dim(), got: alpha.len() });
    }
    let n = geom.extent() as f64;
    let mut phases = Vec::with_capacity(geom.volume() * geom.dim());
    for _ in 0..geom.volume() {
        phases.extend(alpha.iter().map(|a| a / n));
    }
    GaugeField::from_phases(geom, phases)
}

/// Applies `U_j(z) -> g(z) U_j(z) g(z + a e_j)^{-1}` for uniformly random
/// `g(z) = exp(i phi(z))` and returns the new field with the site phases
/// `phi`.
pub fn random_gauge_transform(gauge: &GaugeField, seed: u64) -> (GaugeField, Vec<f64>) {
    let geom = gauge.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi: Vec<f64> =
        (0..geom.volume()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    (apply_gauge_transform(gauge, &phi), phi)
}

pub fn apply_gauge_transform(gauge: &GaugeField, phi: &[f64]) -> GaugeField {
    let geom = gauge.geometry();
    assert_eq!(phi.len(), geom.volume(), "one phase per site");
    let d = geom.dim();
    let mut phases = gauge.phases.clone();
    for site in 0..geom.volume() {
        for j in 0..d {
            phases[site * d + j] += phi[site] - phi[geom.shift(site, j, 1)];
        }
    }
    GaugeField { geometry: geom.clone(), phases }
}

/// Adds independent uniform noise in `[-eps, eps]` to every link phase.
pub fn add_link_noise(gauge: &GaugeField, eps: f64, seed: u64) -> Result<GaugeField> {
    if !(0.0..=0.05).contains(&eps) {
        return Err(Error::InvalidArgument(format!("link noise {eps} outside [0, 0.05]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = gauge.phases.iter().map(|p| if eps > 0.0 { p + rng.random_range(-eps..=eps) } else { *p }).collect();
    GaugeField::from_phases(gauge.geometry(), phases)
}

/// Principal argument of `U_i(z) U_j(z+e_i) U_i(z+e_j)^{-1} U_j(z)^{-1}`.
/// Boundary phases cancel around every plaquette and are left out.
pub fn plaquette_phase(gauge: &GaugeField, site: usize, i: usize, j: usize) -> f64 {
    assert_ne!(i, j, "plaquette needs two distinct directions");
    let g = gauge.geometry();
    let raw = gauge.phase(site, i) + gauge.phase(g.shift(site, i, 1), j)
        - gauge.phase(g.shift(site, j, 1), i)
        - gauge.phase(site, j);
    principal(raw)
}

/// Sum of principal plaquette phases over `2 pi`, in d=2.
pub fn topological_charge(gauge: &GaugeField) -> Result<i64> {
    let g = gauge.geometry();
    if g.dim() != 2 {
        return Err(Error::Geometry("topological charge is defined for d = 2".into()));
    }
    let mut sum = 0.0;
    for site in 0..g.volume() {
        let p = plaquette_phase(gauge, site, 0, 1);
        if (p.abs() - std::f64::consts::PI).abs() < 1e-8 {
            return Err(Error::RoughField(format!("plaquette at site {site} sits on the branch cut")));
        }
        sum += p;
    }
    let q = sum / TAU;
    let rounded = q.round();
    if (q - rounded).abs() > 1e-8 {
        return Err(Error::RoughField(format!("plaquette sum {q} is not an integer")));
    }
    Ok(rounded as i64)
}

/// Constant connection `A` with straight-line transports
/// `T_{x,y} = exp(i A . (x - y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumLine {
    coefficients: Vec<f64>,
}

impl ContinuumLine {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("connection coefficients must be finite".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Transport phase from `y` to `x` for a displacement `x - y`.
    pub fn phase(&self, displacement: &[f64]) -> f64 {
        self.coefficients.iter().zip(displacement).map(|(a, dx)| a * dx).sum()
    }

    /// The links `U_j(z) = T_{z, z + a e_j} = exp(-i a A_j)`.
    pub fn lattice_gauge(&self, geom: &Geometry) -> Result<GaugeField> {
        if self.coefficients.len() != geom.dim() {
            return Err(Error::LengthMismatch { expected: geom.dim(), got: self.coefficients.len() });
        }
        let alpha: Vec<f64> = self.coefficients.iter().map(|a| -a).collect();
        wilson_line_gauge(geom, &alpha)
    }
}

/// On-disk representation of a gauge field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub bc_phase: Vec<f64>,
    pub link_phase: Vec<f64>,
    pub seed: Option<u64>,
    pub generator: String,
}

impl GaugeFile {
    pub fn from_gauge(gauge: &GaugeField, seed: Option<u64>) -> Self {
        let g = gauge.geometry();
        Self {
            d: g.dim(),
            n: g.extent(),
            bc_phase: g.bc_phase().to_vec(),
            link_phase: gauge.phases.clone(),
            seed,
            generator: GENERATOR_TAG.to_string(),
        }
    }

    /// Rebuilds the field on a geometry with the given spinor size.
    pub fn to_gauge(&self, spinor_dim: usize) -> Result<GaugeField> {
        let geom = Geometry::new(self.d, self.n, &self.bc_phase, spinor_dim)?;
        GaugeField::from_phases(&geom, self.link_phase.clone())
    }

    pub fn to_string_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        let expected = file.n.checked_pow(file.d as u32).map(|v| v * file.d);
        if expected != Some(file.link_phase.len()) {
            return Err(Error::Format(format!(
                "{} link phases for d = {}, N = {}",
                file.link_phase.len(),
                file.d,
                file.n
            )));
        }
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string_pretty()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn g2(n: usize) -> Geometry {
        Geometry::periodic(2, n, 2).unwrap()
    }

    #[test]
    fn trivial_background() {
        let g = g2(4);
        let u = trivial_gauge(&g);
        assert!(u.phases().iter().all(|&p| p == 0.0));
        for s in 0..g.volume() {
            assert_eq!(plaquette_phase(&u, s, 0, 1), 0.0);
        }
        assert_eq!(topological_charge(&u).unwrap(), 0);
    }

    #[test]
    fn uniform_flux_matches_closed_form_links() {
        let g = g2(8);
        let q = 3;
        let u = uniform_flux_u1(&g, q).unwrap();
        let n = 8.0;
        for s in 0..g.volume() {
            let (n1, n2) = (g.coord(s, 0) as f64, g.coord(s, 1));
            let u1 = -TAU * q as f64 * n2 as f64 / (n * n);
            assert!((u.phase(s, 0) - u1).abs() < 1e-12);
            let u2 = if n2 == 7 { TAU * q as f64 * n1 / n } else { 0.0 };
            assert!((principal(u.phase(s, 1) - u2)).abs() < 1e-12);
        }
        assert_eq!(topological_charge(&u).unwrap(), 3);
    }

    #[test]
    fn uniform_flux_examples() {
        let g = g2(8);
        assert_eq!(uniform_flux_u1(&g, 0).unwrap(), trivial_gauge(&g));
        let u = uniform_flux_u1(&g, 1).unwrap();
        for s in 0..g.volume() {
            assert!((plaquette_phase(&u, s, 0, 1) - TAU / 64.0).abs() < 1e-12);
        }
        let u = uniform_flux_u1(&g, -2).unwrap();
        assert_eq!(topological_charge(&u).unwrap(), -2);
        let (t, _) = random_gauge_transform(&u, 7);
        assert_eq!(topological_charge(&t).unwrap(), -2);
        assert!(uniform_flux_u1(&g2(4), 8).is_err());
    }

    #[test]
    fn localized_flux_lives_in_its_columns() {
        let g = g2(16);
        let u = localized_flux_u1(&g, 2, 6, 10).unwrap();
        assert_eq!(topological_charge(&u).unwrap(), 2);
        for s in 0..g.volume() {
            let p = plaquette_phase(&u, s, 0, 1);
            let c = g.coord(s, 0);
            if (6..10).contains(&c) {
                assert!((p - TAU * 2.0 / 64.0).abs() < 1e-12);
            } else {
                assert!(p.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wilson_line_holonomy() {
        let g = g2(8);
        assert_eq!(wilson_line_gauge(&g, &[0.0, 0.0]).unwrap(), trivial_gauge(&g));
        let u = wilson_line_gauge(&g, &[PI, 0.0]).unwrap();
        let mut prod = C64::new(1.0, 0.0);
        let mut s = 0;
        for _ in 0..8 {
            prod *= u.link(s, 0);
            s = g.shift(s, 0, 1);
        }
        assert!((prod - C64::new(-1.0, 0.0)).norm() < 1e-14);
        for s in 0..g.volume() {
            assert!(plaquette_phase(&u, s, 0, 1).abs() < 1e-15);
        }
        assert_eq!(topological_charge(&u).unwrap(), 0);
    }

    #[test]
    fn plaquette_antisymmetric() {
        let g = g2(8);
        let u = add_link_noise(&uniform_flux_u1(&g, 1).unwrap(), 0.05, 3).unwrap();
        for s in 0..g.volume() {
            assert!((plaquette_phase(&u, s, 0, 1) + plaquette_phase(&u, s, 1, 0)).abs() < 1e-14);
        }
    }

    #[test]
    fn noise_bound_enforced() {
        let g = g2(4);
        assert!(add_link_noise(&trivial_gauge(&g), 0.1, 1).is_err());
    }

    #[test]
    fn branch_cut_detected() {
        let g = Geometry::periodic(2, 2, 1).unwrap();
        let mut phases = vec![0.0; 8];
        phases[0] = PI;
        let u = GaugeField::from_phases(&g, phases).unwrap();
        assert!(matches!(topological_charge(&u), Err(Error::RoughField(_))));
    }

    #[test]
    fn gauge_file_round_trip_is_bit_exact() {
        let g = Geometry::new(2, 4, &[0.0, PI], 2).unwrap();
        let u = add_link_noise(&random_gauge_transform(&uniform_flux_u1(&g, 1).unwrap(), 11).0, 0.05, 12).unwrap();
        let file = GaugeFile::from_gauge(&u, Some(11));
        let text = file.to_string_pretty().unwrap();
        let back = GaugeFile::parse(&text).unwrap();
        assert_eq!(back, file);
        let v = back.to_gauge(2).unwrap();
        for (a, b) in u.phases().iter().zip(v.phases()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(GaugeFile::parse(&text.replace("\"N\": 4", "\"N\": 5")).is_err());
    }

    #[test]
    fn continuum_line_links() {
        let g = Geometry::periodic(2, 8, 2).unwrap();
        let line = ContinuumLine::new(vec![0.7, -1.3]).unwrap();
        let u = line.lattice_gauge(&g).unwrap();
        // T_{z, z + a e_1} = exp(i A . (-a e_1))
        assert!((u.phase(5, 0) - (-0.7 / 8.0)).abs() < 1e-15);
        assert!((u.phase(5, 1) - (1.3 / 8.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn charge_is_gauge_invariant(q in -6i64..=6, seed in any::<u64>(), eps in 0.0f64..0.05) {
            let g = g2(8);
            let u = add_link_noise(&uniform_flux_u1(&g, q).unwrap(), eps, seed ^ 1).unwrap();
            let (t, _) = random_gauge_transform(&u, seed);
            prop_assert_eq!(topological_charge(&u).unwrap(), q);
            prop_assert_eq!(topological_charge(&t).unwrap(), q);
            for s in 0..g.volume() {
                let d = principal(plaquette_phase(&u, s, 0, 1) - plaquette_phase(&t, s, 0, 1));
                prop_assert!(d.abs() < 1e-12);
            }
        }

        #[test]
        fn wilson_lines_carry_no_charge(a1 in -10.0f64..10.0, a2 in -10.0f64..10.0) {
            let u = wilson_line_gauge(&g2(4), &[a1, a2]).unwrap();
            prop_assert_eq!(topological_charge(&u).unwrap(), 0);
        }

        #[test]
        fn principal_branch_range(x in -100.0f64..100.0) {
            let p = principal(x);
            prop_assert!(p > -PI && p <= PI);
            prop_assert!(((x - p) / TAU - ((x - p) / TAU).round()).abs() < 1e-9);
        }
    }
}
