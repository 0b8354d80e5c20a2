//! Resolution-independent descriptions of domain-wall experiments, so the
//! same configuration can be instantiated at several lattice spacings.

use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_rep, CliffordMode, CliffordRep};
use crate::dirac::{DwFamily, MassFamilyParams, RealDwFamily};
use crate::gauge::{
    add_link_noise, localized_flux_u1, random_gauge_transform, uniform_flux_u1, wilson_line_gauge, GaugeField,
};
use crate::lattice::Geometry;
use crate::spectral::{spectral_flow_tracked, FlowConfig, SpectralFlowResult};
use crate::wall::{domain_wall_profile, DomainWall, RegionSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GaugeSpec {
    Trivial,
    /// Constant curvature `2 pi Q / N^2` (d=2).
    UniformFlux {
        q: i64,
    },
    /// Flux `2 pi Q` spread over the columns with `lo <= x_1 < hi` (d=2).
    LocalizedFlux {
        q: i64,
        lo: f64,
        hi: f64,
    },
    /// Constant holonomies `exp(i alpha_j)`.
    WilsonLine {
        alpha: Vec<f64>,
    },
}

/// A background plus optional random gauge transform and link noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub gauge: GaugeSpec,
    pub transform_seed: Option<u64>,
    pub noise: Option<(f64, u64)>,
}

impl Background {
    pub fn plain(gauge: GaugeSpec) -> Self {
        Self { gauge, transform_seed: None, noise: None }
    }

    pub fn build(&self, geom: &Geometry) -> Result<GaugeField> {
        let n = geom.extent();
        let mut u = match &self.gauge {
            GaugeSpec::Trivial => GaugeField::trivial(geom),
            GaugeSpec::UniformFlux { q } => uniform_flux_u1(geom, *q)?,
            GaugeSpec::LocalizedFlux { q, lo, hi } => {
                let c = |x: f64| (x * n as f64 - 1e-9).ceil() as usize;
                localized_flux_u1(geom, *q, c(*lo), c(*hi))?
            }
            GaugeSpec::WilsonLine { alpha } => wilson_line_gauge(geom, alpha)?,
        };
        if let Some(seed) = self.transform_seed {
            u = random_gauge_transform(&u, seed).0;
        }
        if let Some((eps, seed)) = self.noise {
            u = add_link_noise(&u, eps, seed)?;
        }
        Ok(u)
    }
}

/// Complex even-dimensional domain-wall family `h(t) = D^W - m kappa_t gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwProblem {
    pub dim: usize,
    pub bc_phase: Vec<f64>,
    pub background: Background,
    pub wall: RegionSpec,
    pub mass: f64,
}

impl DwProblem {
    pub fn rep(&self) -> Result<CliffordRep> {
        clifford_rep(self.dim, CliffordMode::ComplexEven)
    }

    pub fn geometry(&self, n: usize) -> Result<Geometry> {
        Geometry::new(self.dim, n, &self.bc_phase, self.rep()?.spinor_dim())
    }

    pub fn gauge(&self, n: usize) -> Result<GaugeField> {
        self.background.build(&self.geometry(n)?)
    }

    pub fn wall(&self, n: usize) -> Result<DomainWall> {
        domain_wall_profile(&self.geometry(n)?, &self.wall)
    }

    pub fn params(&self, n: usize) -> Result<MassFamilyParams> {
        MassFamilyParams::new(self.mass, self.wall(n)?)
    }

    pub fn family(&self, n: usize) -> Result<DwFamily> {
        DwFamily::wilson(&self.gauge(n)?, &self.rep()?, &self.params(n)?)
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig::with_mass(self.mass)
    }

    pub fn flow(&self, n: usize) -> Result<SpectralFlowResult> {
        spectral_flow_tracked(&self.family(n)?, &self.flow_config())
    }
}

/// Real odd-dimensional family `A(t) = D^W - m kappa_t`; every transport
/// must be `+-1`, so only boundary phases `0` or `pi` make sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDwProblem {
    pub dim: usize,
    pub bc_phase: Vec<f64>,
    pub wall: RegionSpec,
    pub mass: f64,
}

impl RealDwProblem {
    pub fn rep(&self) -> Result<CliffordRep> {
        clifford_rep(self.dim, CliffordMode::RealOdd)
    }

    pub fn geometry(&self, n: usize) -> Result<Geometry> {
        Geometry::new(self.dim, n, &self.bc_phase, self.rep()?.spinor_dim())
    }

    pub fn family(&self, n: usize) -> Result<RealDwFamily> {
        let geom = self.geometry(n)?;
        let wall = domain_wall_profile(&geom, &self.wall)?;
        RealDwFamily::new(&GaugeField::trivial(&geom), &self.rep()?, &MassFamilyParams::new(self.mass, wall)?)
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
