//! Finite-element interpolator between a coarse lattice (spacing `a`) and a
//! fine lattice (spacing `a_f = a / ratio`) that stands in for the continuum:
//!
//! ```text
//! (iota phi)(x) = a^d sum_z rho_a(x - z) T_{x,z} phi(z)
//! (iota^* psi)(z) = a_f^d sum_x rho_a(x - z) T_{z,x} psi(x)
//! ```
//!
//! `a^d rho_a(x - z)` is the tensor product of hat functions of width `2a`,
//! so each fine site sees `2^d` coarse sites and the weights sum to one.
//! Both lattices carry the same boundary phases; a straight path that
//! crosses the seam in direction `j` picks up `exp(+-i bc_j)`.

use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_rep, CliffordMode};
use crate::dirac::wilson_dirac;
use crate::gauge::{uniform_flux_u1, ContinuumLine, GaugeField};
use crate::lattice::{norm_l21_slice, norm_l2_slice, Geometry, NormParams};
use crate::problem::{require, Background, GaugeSpec};
use crate::wall::{kappa_t, DomainWall, RegionSpec};
use crate::{Error, Result, C64, TAU};

/// Continuum connections whose straight-line transports have a closed
/// form and restrict to lattice links on every lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transport {
    Trivial,
    /// `T_{x,y} = exp(i A . (x - y))`.
    ConstantConnection(ContinuumLine),
    /// Constant curvature `2 pi Q` in d=2 whose links on an `N` lattice are
    /// those of [`uniform_flux_u1`]: `A_1 = -2 pi Q frac(x_2)` and a
    /// transition `exp(+-2 pi i Q x_1)` across the seam in direction 2.
    UniformFlux {
        q: i64,
    },
}

impl Transport {
    /// The transport matching a background, if it has one.
    pub fn for_background(bg: &Background) -> Result<Self> {
        if bg.transform_seed.is_some() || bg.noise.is_some() {
            return Err(Error::Transport("randomized links have no straight-line continuum transport".into()));
        }
        match &bg.gauge {
            GaugeSpec::Trivial => Ok(Transport::Trivial),
            GaugeSpec::UniformFlux { q } => Ok(Transport::UniformFlux { q: *q }),
            GaugeSpec::WilsonLine { alpha } => {
                Ok(Transport::ConstantConnection(ContinuumLine::new(alpha.iter().map(|a| -a).collect())?))
            }
            GaugeSpec::LocalizedFlux { .. } => {
                Err(Error::Transport("localized flux has no closed-form straight-line transport".into()))
            }
        }
    }

    /// Lattice links obtained by restricting the transport to `geom`.
    pub fn lattice_gauge(&self, geom: &Geometry) -> Result<GaugeField> {
        match self {
            Transport::Trivial => Ok(GaugeField::trivial(geom)),
            Transport::ConstantConnection(line) => line.lattice_gauge(geom),
            Transport::UniformFlux { q } => uniform_flux_u1(geom, *q),
        }
    }

    /// Phase of `T_{x, x + delta}` for `x` in `[0, 1)^d` and a short
    /// displacement `delta`, boundary phases included.
    pub fn phase(&self, x: &[f64], delta: &[f64], bc: &[f64]) -> f64 {
        let mut phase = 0.0;
        for j in 0..x.len() {
            let end = x[j] + delta[j];
            if end >= 1.0 {
                phase += bc[j];
            } else if end < 0.0 {
                phase -= bc[j];
            }
        }
        match self {
            Transport::Trivial => phase,
            Transport::ConstantConnection(line) => phase - line.phase(delta),
            Transport::UniformFlux { q } => {
                let q = *q as f64;
                let (x1, x2, d1, d2) = (x[0], x[1], delta[0], delta[1]);
                let end = x2 + d2;
                // fraction of the path travelled past the seam in direction 2
                let (wrap, seam) = if end >= 1.0 {
                    let s = (1.0 - x2) / d2;
                    (-(1.0 - s), TAU * q * (x1 + s * d1))
                } else if end < 0.0 {
                    let s = -x2 / d2;
                    (1.0 - s, -TAU * q * (x1 + s * d1))
                } else {
                    (0.0, 0.0)
                };
                phase - TAU * q * d1 * (x2 + 0.5 * d2 + wrap) + seam
            }
        }
    }
}

/// `a rho_a^{(1)}(t)`: periodic hat of height 1 and support `(-a, a)`.
fn hat(a: f64, t: f64) -> f64 {
    let u = t.rem_euclid(1.0);
    let d = u.min(1.0 - u);
    (1.0 - d / a).max(0.0)
}

/// `rho_a^{(1)}(t) = (1/a) max{0, 1 - t/a, 1 - (1 - t)/a}` for `t` mod 1.
pub fn rho_1d(a: f64, t: f64) -> f64 {
    hat(a, t) / a
}

/// `iota` and its adjoint as sparse site-level weights; the spinor index is
/// carried through unchanged.
#[derive(Debug, Clone)]
pub struct InterpolatorPair {
    coarse: Geometry,
    fine: Geometry,
    transport: Transport,
    ratio: usize,
    // row = fine site, 2^d entries each: (coarse site, a^d rho T)
    rows: Vec<Vec<(usize, C64)>>,
}

pub fn build_interpolator(coarse: &Geometry, fine: &Geometry, transport: Transport) -> Result<InterpolatorPair> {
    require(coarse.dim() == fine.dim() && coarse.spinor_dim() == fine.spinor_dim(), || {
        "coarse and fine lattices need the same dimension and spinor size".into()
    })?;
    require(coarse.bc_phase() == fine.bc_phase(), || "coarse and fine boundary phases differ".into())?;
    let nc = coarse.extent();
    let nf = fine.extent();
    require(nf % nc == 0 && nf / nc >= 2, || format!("fine N = {nf} must be a multiple >= 2 of coarse N = {nc}"))?;
    if let Transport::UniformFlux { q } = transport {
        uniform_flux_u1(coarse, q)?;
        uniform_flux_u1(fine, q)?;
    }
    if let Transport::ConstantConnection(line) = &transport {
        require(line.coefficients().len() == coarse.dim(), || "connection needs d coefficients".into())?;
    }
    let ratio = nf / nc;
    let d = coarse.dim();
    let a = coarse.spacing();
    let rows = (0..fine.volume())
        .map(|xs| {
            let xc = fine.site_coords(xs);
            let x: Vec<f64> = xc.iter().map(|&c| c as f64 / nf as f64).collect();
            let mut entries = Vec::with_capacity(1 << d);
            for corner in 0..(1usize << d) {
                let mut w = 1.0;
                let mut zc = vec![0i64; d];
                let mut delta = vec![0.0; d];
                for j in 0..d {
                    let base = xc[j] / ratio;
                    let off = xc[j] % ratio;
                    let up = corner >> j & 1 == 1;
                    // integer weights keep the partition of unity exact
                    let (wj, zj, steps) =
                        if up { (off, base + 1, (ratio - off) as f64) } else { (ratio - off, base, -(off as f64)) };
                    w *= wj as f64 / ratio as f64;
                    zc[j] = zj as i64;
                    delta[j] = steps * a / ratio as f64;
                }
                if w == 0.0 {
                    continue;
                }
                let phase = transport.phase(&x, &delta, coarse.bc_phase());
                entries.push((coarse.site_index(&zc), C64::from_polar(w, phase)));
            }
            entries
        })
        .collect();
    Ok(InterpolatorPair { coarse: coarse.clone(), fine: fine.clone(), transport, ratio, rows })
}

impl InterpolatorPair {
    pub fn coarse(&self) -> &Geometry {
        &self.coarse
    }

    pub fn fine(&self) -> &Geometry {
        &self.fine
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }

    /// Site-level `iota` weights in row-major (fine site, coarse site) form.
    pub fn site_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(x, r)| r.iter().map(move |&(z, w)| (x, z, w)))
    }

    /// `(a_f / a)^d`, the quadrature weight ratio between the lattices.
    pub fn weight_ratio(&self) -> f64 {
        (self.ratio as f64).powi(-(self.coarse.dim() as i32))
    }

    /// Coarse field to fine field.
    pub fn apply(&self, phi: &[C64]) -> Vec<C64> {
        let s = self.coarse.spinor_dim();
        assert_eq!(phi.len(), self.coarse.field_dim(), "coarse field length");
        let mut out = vec![C64::new(0.0, 0.0); self.fine.field_dim()];
        for (x, row) in self.rows.iter().enumerate() {
            for &(z, w) in row {
                for al in 0..s {
                    out[x * s + al] += w * phi[z * s + al];
                }
            }
        }
        out
    }

    /// Fine field to coarse field; exact adjoint of [`apply`](Self::apply)
    /// for the `a_f^d` and `a^d` weighted inner products.
    pub fn apply_adjoint(&self, psi: &[C64]) -> Vec<C64> {
        let s = self.coarse.spinor_dim();
        assert_eq!(psi.len(), self.fine.field_dim(), "fine field length");
        let scale = self.weight_ratio();
        let mut out = vec![C64::new(0.0, 0.0); self.coarse.field_dim()];
        for (x, row) in self.rows.iter().enumerate() {
            for &(z, w) in row {
                for al in 0..s {
                    out[z * s + al] += w.conj() * scale * psi[x * s + al];
                }
            }
        }
        out
    }

    /// Largest `|a^d sum_z rho_a(x - z) - 1|` over fine sites.
    pub fn partition_of_unity_residual(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|(_, w)| w.norm()).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `a^d sum_{e in {-1,0,1}^d} int rho_a(x) rho_a(x - a e) dx` as a
    /// fine-lattice Riemann sum; exactly 1 in the continuum.
    pub fn overlap_identity(&self) -> f64 {
        let d = self.coarse.dim();
        let a = self.coarse.spacing();
        let af = self.fine.spacing();
        let mut total = 0.0;
        for e in 0..3usize.pow(d as u32) {
            let shift: Vec<f64> = (0..d).map(|j| ((e / 3usize.pow(j as u32)) % 3) as f64 - 1.0).collect();
            for xs in 0..self.fine.volume() {
                let x = self.fine.position(xs);
                let p: f64 = (0..d).map(|j| rho_1d(a, x[j]) * rho_1d(a, x[j] - a * shift[j])).product();
                total += p;
            }
        }
        a.powi(d as i32) * af.powi(d as i32) * total
    }

    /// `iota` in orthonormal bases of both lattices,
    /// `(a_f / a)^{d/2} iota`, as a dense site-level matrix; its conjugate
    /// transpose is `iota^*` in the same bases.
    pub fn orthonormal_dense(&self) -> nalgebra::DMatrix<C64> {
        let scale = self.weight_ratio().sqrt();
        let mut m = nalgebra::DMatrix::zeros(self.fine.volume(), self.coarse.volume());
        for (x, z, w) in self.site_entries() {
            m[(x, z)] += w * scale;
        }
        m
    }
}

fn inner(u: &[C64], v: &[C64], geom: &Geometry) -> C64 {
    let w = geom.spacing().powi(geom.dim() as i32);
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<C64>() * w
}

fn random_field(n: usize, rng: &mut impl rand::Rng) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// Plane wave `exp(i p.x)` with `p_j = principal(bc_j) + 2 pi k_j`, the
/// modes compatible with the boundary phases, times a fixed spinor.
fn smooth_field(geom: &Geometry, k: &[i64], spinor: &[C64]) -> Vec<C64> {
    let s = geom.spinor_dim();
    let mut out = Vec::with_capacity(geom.field_dim());
    for site in 0..geom.volume() {
        let x = geom.position(site);
        let ph: f64 =
            (0..x.len()).map(|j| (crate::gauge::principal(geom.bc_phase()[j]) + TAU * k[j] as f64) * x[j]).sum();
        let wave = C64::from_polar(1.0, ph);
        out.extend((0..s).map(|al| wave * spinor[al % spinor.len()]));
    }
    out
}

/// Measured quantities of one [`check_props`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropsReport {
    pub a: f64,
    pub ratio: usize,
    /// `max |iota^* iota phi - phi|^2_{L^2} / |phi|^2_{L^2_1}` over random `phi`.
    pub r1: f64,
    /// `|iota iota^* psi - psi|_{L^2}` for the lowest mode allowed by the
    /// boundary phases.
    pub r2: f64,
    /// `|<iota^* psi', D_a iota^* psi> - <psi', D_f psi>|` with Wilson
    /// operators on both lattices (complex even d only, else NaN).
    pub r3: f64,
    /// Largest relative defect of `<iota phi, psi> = <phi, iota^* psi>`.
    pub adjoint_defect: f64,
    pub partition_residual: f64,
    pub overlap_identity: f64,
}

pub fn check_props(pair: &InterpolatorPair, trials: usize, seed: u64) -> Result<PropsReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (cg, fg) = (pair.coarse(), pair.fine());
    let gauge_c = pair.transport.lattice_gauge(cg)?;
    let gauge_f = pair.transport.lattice_gauge(fg)?;
    let params = NormParams::default();
    let mut r1 = 0.0f64;
    let mut adjoint_defect = 0.0f64;
    for _ in 0..trials.max(1) {
        let phi = random_field(cg.field_dim(), &mut rng);
        let back = pair.apply_adjoint(&pair.apply(&phi));
        let diff: Vec<C64> = back.iter().zip(&phi).map(|(b, p)| b - p).collect();
        r1 = r1.max(norm_l2_slice(&diff, cg).powi(2) / norm_l21_slice(&phi, &gauge_c, params).powi(2));
        let psi = random_field(fg.field_dim(), &mut rng);
        let lhs = inner(&pair.apply(&phi), &psi, fg);
        let rhs = inner(&phi, &pair.apply_adjoint(&psi), cg);
        adjoint_defect = adjoint_defect.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE));
    }
    let one = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let lowest = vec![0; fg.dim()];
    let psi = smooth_field(fg, &lowest, &one);
    let round = pair.apply(&pair.apply_adjoint(&psi));
    let diff: Vec<C64> = round.iter().zip(&psi).map(|(a, b)| a - b).collect();
    let r2 = norm_l2_slice(&diff, fg);
    let r3 = if cg.dim() % 2 == 0 {
        let rep = clifford_rep(cg.dim(), CliffordMode::ComplexEven)?;
        if rep.spinor_dim() == cg.spinor_dim() {
            let dc = wilson_dirac(&gauge_c, &rep)?;
            let df = wilson_dirac(&gauge_f, &rep)?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let psi2 = smooth_field(fg, &lowest, &[C64::new(h, 0.0), C64::new(0.0, h)]);
            let (p1, p2) = (pair.apply_adjoint(&psi), pair.apply_adjoint(&psi2));
            (inner(&p2, &dc.matvec(&p1), cg) - inner(&psi2, &df.matvec(&psi), fg)).norm()
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok(PropsReport {
        a: cg.spacing(),
        ratio: pair.ratio(),
        r1,
        r2,
        r3,
        adjoint_defect,
        partition_residual: pair.partition_of_unity_residual(),
        overlap_identity: pair.overlap_identity(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub a: f64,
    /// `(t, max_phi |kappa_t iota phi - iota(kappa_t phi)|_{L^2} / |phi|_{L^2_1})`
    /// over random `phi` and the lowest smooth mode. Random fields decay like
    /// `a^{3/2}`; the smooth mode carries the `a^{1/2}` wall rate.
    pub ratios: Vec<(f64, f64)>,
}

impl CommutatorReport {
    pub fn at(&self, t: f64) -> Option<f64> {
        self.ratios.iter().find(|r| r.0 == t).map(|r| r.1)
    }
}

/// Commutator of `iota` with the mass profile; the fine profile samples the
/// coarse wall's analytic region.
pub fn check_dw_commutator(
    pair: &InterpolatorPair,
    wall: &RegionSpec,
    trials: usize,
    seed: u64,
) -> Result<CommutatorReport> {
    use rand::SeedableRng;
    let (cg, fg) = (pair.coarse(), pair.fine());
    let coarse_wall = crate::wall::domain_wall_profile(cg, wall)?;
    let fine_wall = coarse_wall.resample(fg)?;
    let gauge_c = pair.transport.lattice_gauge(cg)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut fields: Vec<Vec<C64>> = (0..trials.max(1)).map(|_| random_field(cg.field_dim(), &mut rng)).collect();
    fields.push(smooth_field(cg, &vec![0; cg.dim()], &[C64::new(1.0, 0.0)]));
    let s = cg.spinor_dim();
    let scale = |w: &DomainWall, t: f64, v: &[C64]| -> Result<Vec<C64>> {
        let k = kappa_t(w, t)?;
        Ok(v.iter().enumerate().map(|(i, z)| z * k[i / s]).collect())
    };
    let mut ratios = Vec::new();
    for t in [-1.0, 0.0, 1.0] {
        let mut worst = 0.0f64;
        for phi in &fields {
            let lhs = scale(&fine_wall, t, &pair.apply(phi))?;
            let rhs = pair.apply(&scale(&coarse_wall, t, phi)?);
            let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let r = norm_l2_slice(&diff, fg) / norm_l21_slice(phi, &gauge_c, NormParams::default());
            worst = worst.max(r);
        }
        ratios.push((t, worst));
    }
    Ok(CommutatorReport { a: cg.spacing(), ratios })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
