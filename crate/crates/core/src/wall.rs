//! Domain-wall mass profiles `kappa` and the affine family `kappa_t`.
//!
//! Bands are slabs in the first coordinate. A band `[lo, hi)` contains the
//! sites with `lo <= z_1 a < hi`; its analytic walls are moved to the
//! half-integer positions `(ceil(edge / a) - 1/2) a`, so no site of the
//! defining lattice lies on a wall. Points exactly on a wall count as inside.

use serde::{Deserialize, Serialize};

use crate::lattice::Geometry;
use crate::{Error, Result};

const ON_WALL_TOL: f64 = 1e-12;

/// Requested region where `kappa = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegionSpec {
    WholeTorus,
    Band { lo: f64, hi: f64 },
    Disk { center: Vec<f64>, radius: f64 },
}

impl RegionSpec {
    pub fn complement(&self) -> Option<RegionSpec> {
        match self {
            RegionSpec::Band { lo, hi } => Some(RegionSpec::Band { lo: *hi, hi: lo + 1.0 }),
            _ => None,
        }
    }
}

/// Analytic region after snapping; evaluable at any point of the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    WholeTorus,
    /// Closed slab between the walls `x_1 = lower` and `x_1 = upper`
    /// (periodic, `lower < upper < lower + 1`).
    Band {
        lower: f64,
        upper: f64,
    },
    Disk {
        center: Vec<f64>,
        radius: f64,
    },
}

fn periodic_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::WholeTorus => true,
            Region::Band { lower, upper } => {
                let u = (x[0] - lower).rem_euclid(1.0);
                u <= upper - lower + ON_WALL_TOL || 1.0 - u <= ON_WALL_TOL
            }
            Region::Disk { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| periodic_distance(*a, *b).powi(2)).sum();
                r2.sqrt() <= radius + ON_WALL_TOL
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainWall {
    spec: RegionSpec,
    region: Region,
    kappa: Vec<f64>,
}

fn snap(edge: f64, n: usize) -> f64 {
    ((edge * n as f64 - 1e-9).ceil() - 0.5) / n as f64
}

/// Builds `kappa` on the sites of `geom`.
pub fn domain_wall_profile(geom: &Geometry, spec: &RegionSpec) -> Result<DomainWall> {
    let region = match spec {
        RegionSpec::WholeTorus => Region::WholeTorus,
        RegionSpec::Band { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo || hi - lo >= 1.0 {
                return Err(Error::DegenerateWall(format!("band [{lo}, {hi}) is not a proper slab")));
            }
            let n = geom.extent();
            let lower = snap(*lo, n);
            let upper = snap(*hi, n);
            if upper <= lower || upper - lower >= 1.0 {
                return Err(Error::DegenerateWall(format!(
                    "band [{lo}, {hi}) holds no proper set of sites at N = {n}"
                )));
            }
            Region::Band { lower, upper }
        }
        RegionSpec::Disk { center, radius } => {
            if center.len() != geom.dim() || !(*radius > 0.0) {
                return Err(Error::DegenerateWall("disk needs d center coordinates and a positive radius".into()));
            }
            Region::Disk { center: center.clone(), radius: *radius }
        }
    };
    DomainWall::from_region(geom, spec.clone(), region)
}

impl DomainWall {
    fn from_region(geom: &Geometry, spec: RegionSpec, region: Region) -> Result<Self> {
        let kappa: Vec<f64> =
            (0..geom.volume()).map(|s| if region.contains(&geom.position(s)) { 1.0 } else { -1.0 }).collect();
        if region != Region::WholeTorus {
            let inside = kappa.iter().filter(|&&k| k > 0.0).count();
            if inside == 0 || inside == kappa.len() {
                return Err(Error::DegenerateWall(format!("{inside} of {} sites inside the region", kappa.len())));
            }
        }
        Ok(Self { spec, region, kappa })
    }

    /// The same analytic region sampled on another lattice (no re-snapping).
    pub fn resample(&self, geom: &Geometry) -> Result<Self> {
        Self::from_region(geom, self.spec.clone(), self.region.clone())
    }

    pub fn spec(&self) -> &RegionSpec {
        &self.spec
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// For a band: first row `r` inside and number of rows inside, in
    /// lattice units of the defining geometry.
    pub fn band_rows(&self, geom: &Geometry) -> Option<(usize, usize)> {
        match self.region {
            Region::Band { lower, upper } => {
                let n = geom.extent() as f64;
                let first = (lower * n + 0.5).round().rem_euclid(n) as usize;
                let count = ((upper - lower) * n).round() as usize;
                Some((first, count))
            }
            _ => None,
        }
    }
}

/// `kappa_t = ((1 + t)/2) kappa - (1 - t)/2`.
pub fn kappa_t_value(kappa: f64, t: f64) -> f64 {
    0.5 * (1.0 + t) * kappa - 0.5 * (1.0 - t)
}

pub fn kappa_t(wall: &DomainWall, t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    Ok(wall.kappa.iter().map(|&k| kappa_t_value(k, t)).collect())
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfRange(t));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Geometry {
        Geometry::periodic(2, n, 2).unwrap()
    }

    #[test]
    fn whole_torus_is_all_plus() {
        let w = domain_wall_profile(&g(4), &RegionSpec::WholeTorus).unwrap();
        assert!(w.kappa().iter().all(|&k| k == 1.0));
    }

    #[test]
    fn band_quarter_on_n8() {
        let geom = g(8);
        let w = domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.25, hi: 0.75 }).unwrap();
        for s in 0..geom.volume() {
            let inside = (2..=5).contains(&geom.coord(s, 0));
            assert_eq!(w.kappa()[s], if inside { 1.0 } else { -1.0 });
        }
        assert_eq!(w.band_rows(&geom), Some((2, 4)));
        assert_eq!(w.region(), &Region::Band { lower: 1.5 / 8.0, upper: 5.5 / 8.0 });
    }

    #[test]
    fn complement_negates() {
        let geom = g(8);
        let spec = RegionSpec::Band { lo: 0.25, hi: 0.75 };
        let w = domain_wall_profile(&geom, &spec).unwrap();
        let c = domain_wall_profile(&geom, &spec.complement().unwrap()).unwrap();
        for (a, b) in w.kappa().iter().zip(c.kappa()) {
            assert_eq!(*a, -*b);
        }
        assert_eq!(c.band_rows(&geom), Some((6, 4)));
    }

    #[test]
    fn off_grid_edges() {
        let geom = g(8);
        // lo = 0.2 -> first site 2 (0.25); hi = 0.7 -> last site 5 (0.625)
        let w = domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.2, hi: 0.7 }).unwrap();
        assert_eq!(w.band_rows(&geom), Some((2, 4)));
    }

    #[test]
    fn degenerate_regions() {
        let geom = g(8);
        assert!(domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.3, hi: 0.3 }).is_err());
        assert!(domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.26, hi: 0.3 }).is_err());
        assert!(domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.0, hi: 1.0 }).is_err());
        let tiny = RegionSpec::Disk { center: vec![0.51, 0.51], radius: 0.001 };
        assert!(matches!(domain_wall_profile(&geom, &tiny), Err(Error::DegenerateWall(_))));
    }

    #[test]
    fn disk_profile_is_periodic() {
        let geom = g(8);
        let w = domain_wall_profile(&geom, &RegionSpec::Disk { center: vec![0.0, 0.0], radius: 0.2 }).unwrap();
        let inside: Vec<usize> = (0..geom.volume()).filter(|&s| w.kappa()[s] > 0.0).collect();
        // distances 0, 1/8 along axes (both sides), sqrt(2)/8 diagonally
        assert_eq!(inside.len(), 9);
        assert!(inside.contains(&geom.site_index(&[7, 7])));
    }

    #[test]
    fn resample_keeps_walls() {
        let coarse = g(8);
        let fine = g(32);
        let w = domain_wall_profile(&coarse, &RegionSpec::Band { lo: 0.25, hi: 0.75 }).unwrap();
        let f = w.resample(&fine).unwrap();
        // fine sites from 6/32 = 1.5/8 (on the wall, counted inside) to 22/32
        for s in 0..fine.volume() {
            let c = fine.coord(s, 0);
            assert_eq!(f.kappa()[s], if (6..=22).contains(&c) { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn kappa_t_formula() {
        let geom = g(8);
        let w = domain_wall_profile(&geom, &RegionSpec::Band { lo: 0.25, hi: 0.75 }).unwrap();
        assert!(kappa_t(&w, -1.0).unwrap().iter().all(|&k| k == -1.0));
        assert_eq!(kappa_t(&w, 1.0).unwrap(), w.kappa());
        let k0 = kappa_t(&w, 0.0).unwrap();
        for (k, kt) in w.kappa().iter().zip(&k0) {
            assert_eq!(*kt, if *k > 0.0 { 0.0 } else { -1.0 });
        }
        assert!(matches!(kappa_t(&w, 1.5), Err(Error::ParameterOutOfRange(_))));
    }
}
