//! The combined operator coupling a fine-lattice ("continuum") domain-wall
//! operator to a coarse one through the interpolator:
//!
//! ```text
//! D(t, s) = [[ h_fine(t),      s iota ],
//!            [ s iota^*,  -h_coarse(t) ]]
//! ```
//!
//! Both blocks are written in orthonormal bases (`a_f^{d/2}` and `a^{d/2}`
//! rescaled fields), where `iota^*` is literally the conjugate transpose of
//! `(a_f / a)^{d/2} iota`, so the assembled matrix is Hermitian.

use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_rep, CliffordMode, CliffordRep};
use crate::dirac::wilson_dirac;
use crate::interp::InterpolatorPair;
use crate::problem::require;
use crate::sparse::OperatorMatrix;
use crate::spectral::{eigvals_hermitian_dense, eta_from_spectrum, ZERO_TOL};
use crate::wall::{check_t, domain_wall_profile, kappa_t_value, RegionSpec};
use crate::{par_map, Error, Result, C64};

/// Pieces of `D(t, s)` that do not depend on `(t, s)`.
#[derive(Debug, Clone)]
pub struct CombinedOperator {
    fine_dirac: OperatorMatrix<C64>,
    coarse_dirac: OperatorMatrix<C64>,
    fine_kappa: Vec<f64>,
    coarse_kappa: Vec<f64>,
    gamma: nalgebra::DMatrix<C64>,
    // orthonormal-basis iota as (fine index, coarse index, value)
    iota: Vec<(usize, usize, C64)>,
    fine_dim: usize,
    m: f64,
}

impl CombinedOperator {
    /// The fine lattice samples the coarse wall's analytic region, so both
    /// blocks see the same wall.
    pub fn new(pair: &InterpolatorPair, rep: &CliffordRep, m: f64, wall: &RegionSpec) -> Result<Self> {
        require(m > 0.0, || format!("mass must be positive, got {m}"))?;
        let gamma = rep.gamma().ok_or_else(|| Error::Clifford("the combined operator needs a grading".into()))?.clone();
        let (cg, fg) = (pair.coarse(), pair.fine());
        require(rep.spinor_dim() == cg.spinor_dim() && rep.dim() == cg.dim(), || {
            "representation does not match the lattice spinor size".into()
        })?;
        let coarse_wall = domain_wall_profile(cg, wall)?;
        let fine_wall = coarse_wall.resample(fg)?;
        let s = cg.spinor_dim();
        let scale = pair.weight_ratio().sqrt();
        let iota = pair
            .site_entries()
            .flat_map(|(x, z, w)| (0..s).map(move |al| (x * s + al, z * s + al, w * scale)))
            .collect();
        Ok(Self {
            fine_dirac: wilson_dirac(&pair.transport().lattice_gauge(fg)?, rep)?,
            coarse_dirac: wilson_dirac(&pair.transport().lattice_gauge(cg)?, rep)?,
            fine_kappa: fine_wall.kappa().to_vec(),
            coarse_kappa: coarse_wall.kappa().to_vec(),
            gamma,
            iota,
            fine_dim: fg.field_dim(),
            m,
        })
    }

    pub fn dim(&self) -> usize {
        self.fine_dim + self.coarse_dirac.dim()
    }

    pub fn at(&self, t: f64, s: f64) -> Result<OperatorMatrix<C64>> {
        require((0.0..=1.0).contains(&s), || format!("coupling s = {s} outside [0, 1]"))?;
        check_t(t)?;
        let kf: Vec<f64> = self.fine_kappa.iter().map(|&k| kappa_t_value(k, t)).collect();
        let kc: Vec<f64> = self.coarse_kappa.iter().map(|&k| kappa_t_value(k, t)).collect();
        let nf = self.fine_dim;
        let sd = self.gamma.nrows();
        let mut trip = Vec::with_capacity(self.fine_dirac.nnz() + self.coarse_dirac.nnz() + 2 * self.iota.len());
        trip.extend(self.fine_dirac.triplets());
        trip.extend(self.coarse_dirac.triplets().map(|(r, c, v)| (nf + r, nf + c, -v)));
        for (offset, sign, k) in [(0, 1.0, &kf), (nf, -1.0, &kc)] {
            for (site, &kv) in k.iter().enumerate() {
                for a in 0..sd {
                    for b in 0..sd {
                        let v = self.gamma[(a, b)] * (-sign * self.m * kv);
                        trip.push((offset + site * sd + a, offset + site * sd + b, v));
                    }
                }
            }
        }
        if s != 0.0 {
            for &(x, z, w) in &self.iota {
                trip.push((x, nf + z, w * s));
                trip.push((nf + z, x, w.conj() * s));
            }
        }
        OperatorMatrix::from_triplets(self.dim(), trip).into_hermitian()
    }
}

/// `D(t, s)` for one parameter point; use [`CombinedOperator`] when
/// evaluating many points.
pub fn combined_operator(
    pair: &InterpolatorPair,
    rep: &CliffordRep,
    m: f64,
    t: f64,
    s: f64,
    wall: &RegionSpec,
) -> Result<OperatorMatrix<C64>> {
    CombinedOperator::new(pair, rep, m, wall)?.at(t, s)
}

/// `samples` points spread evenly by arc length over the staple
/// `(t, s) = (-1, 0) -> (-1, 1) -> (1, 1) -> (1, 0)`.
pub fn staple_points(samples: usize) -> Vec<(f64, f64)> {
    let total = 4.0;
    (0..samples)
        .map(|k| {
            let u = if samples == 1 { 0.0 } else { total * k as f64 / (samples - 1) as f64 };
            if u <= 1.0 {
                (-1.0, u)
            } else if u <= 3.0 {
                (-1.0 + (u - 1.0), 1.0)
            } else {
                (1.0, (4.0 - u).max(0.0))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StapleSample {
    pub t: f64,
    pub s: f64,
    pub min_abs_eig: f64,
    pub eta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StapleReport {
    pub coarse_n: usize,
    pub fine_n: usize,
    pub m: f64,
    pub samples: Vec<StapleSample>,
    /// `(eta(D(1,0)) - eta(D(-1,0))) / 2 = sf_fine - sf_coarse`. A nonzero
    /// value forces a zero mode somewhere on the staple, sampled or not.
    pub implied_path_flow: i64,
}

impl StapleReport {
    pub fn min_over_path(&self) -> f64 {
        self.samples.iter().map(|p| p.min_abs_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn to_text(&self) -> String {
        let mut out =
            format!("# coarse N={} fine N={} m={}\n# t s min_abs_eig eta\n", self.coarse_n, self.fine_n, self.m);
        for p in &self.samples {
            out.push_str(&format!("{:+.6} {:.6} {:.6e} {}\n", p.t, p.s, p.min_abs_eig, p.eta));
        }
        out.push_str(&format!(
            "# min over path {:.6e}\n# implied path flow {}\n",
            self.min_over_path(),
            self.implied_path_flow
        ));
        out
    }
}

/// Dense spectrum of `D(t, s)` at evenly spaced staple points. The two
/// `s = 0` endpoints are block diagonal, so their spectra also certify that
/// `h_fine(+-1)` and `h_coarse(+-1)` are invertible.
pub fn staple_scan(pair: &InterpolatorPair, m: f64, wall: &RegionSpec, samples: usize) -> Result<StapleReport> {
    require(samples >= 2, || "staple scan needs at least the two endpoints".into())?;
    let rep = clifford_rep(pair.coarse().dim(), CliffordMode::ComplexEven)?;
    let op = CombinedOperator::new(pair, &rep, m, wall)?;
    let points = staple_points(samples);
    let spectra =
        par_map(&points, |&(t, s)| -> Result<Vec<f64>> { Ok(eigvals_hermitian_dense(op.at(t, s)?.to_dense())) });
    let mut out = Vec::with_capacity(samples);
    let mut etas = Vec::with_capacity(samples);
    for (&(t, s), spec) in points.iter().zip(spectra) {
        let spec = spec?;
        let min_abs = spec.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
        let eta = eta_from_spectrum(&spec, ZERO_TOL);
        if s == 0.0 {
            if let Err(Error::Kernel(_)) = eta {
                return Err(Error::EndpointKernel { t, min_abs });
            }
        }
        let eta = eta.unwrap_or(0);
        etas.push(eta);
        out.push(StapleSample { t, s, min_abs_eig: min_abs, eta });
    }
    let implied_path_flow = (etas[samples - 1] - etas[0]) / 2;
    Ok(StapleReport {
        coarse_n: pair.coarse().extent(),
        fine_n: pair.fine().extent(),
        m,
        samples: out,
        implied_path_flow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{build_interpolator, Transport};
    use crate::lattice::Geometry;
    use std::f64::consts::PI;

    fn setup(nc: usize, ratio: usize, q: i64) -> (InterpolatorPair, CliffordRep) {
        let bc = [0.0, PI];
        let c = Geometry::new(2, nc, &bc, 2).unwrap();
        let f = Geometry::new(2, nc * ratio, &bc, 2).unwrap();
        let tr = if q == 0 { Transport::Trivial } else { Transport::UniformFlux { q } };
        (build_interpolator(&c, &f, tr).unwrap(), clifford_rep(2, CliffordMode::ComplexEven).unwrap())
    }

    #[test]
    fn decoupled_spectrum_is_union_of_blocks() {
        use crate::dirac::{dw_operator, MassFamilyParams};
        let (pair, rep) = setup(4, 2, 1);
        let wall = RegionSpec::Band { lo: 0.25, hi: 0.75 };
        let d = combined_operator(&pair, &rep, 1.0, 0.3, 0.0, &wall).unwrap();
        assert!(d.hermiticity_defect() <= 1e-13);
        let cw = domain_wall_profile(pair.coarse(), &wall).unwrap();
        let fw = cw.resample(pair.fine()).unwrap();
        let uf = pair.transport().lattice_gauge(pair.fine()).unwrap();
        let uc = pair.transport().lattice_gauge(pair.coarse()).unwrap();
        let hf = dw_operator(&uf, &rep, &MassFamilyParams::new(1.0, fw).unwrap(), 0.3).unwrap();
        let hc = dw_operator(&uc, &rep, &MassFamilyParams::new(1.0, cw).unwrap(), 0.3).unwrap();
        let mut expect = eigvals_hermitian_dense(hf.to_dense());
        expect.extend(eigvals_hermitian_dense(hc.to_dense()).iter().map(|x| -x));
        expect.sort_by(f64::total_cmp);
        let got = eigvals_hermitian_dense(d.to_dense());
        let dev = got.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn coupled_operator_is_hermitian() {
        let (pair, rep) = setup(4, 4, 1);
        let d = combined_operator(&pair, &rep, 1.0, -0.2, 0.7, &RegionSpec::Band { lo: 0.25, hi: 0.75 }).unwrap();
        assert_eq!(d.dim(), 2 * (16 + 256));
        assert!(d.hermiticity_defect() <= 1e-13);
        assert!(combined_operator(&pair, &rep, 1.0, 0.0, 1.5, &RegionSpec::WholeTorus).is_err());
    }

    #[test]
    fn staple_points_follow_the_path() {
        let p = staple_points(5);
        assert_eq!(p, vec![(-1.0, 0.0), (-1.0, 1.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        assert!(staple_points(20).iter().all(|&(t, s)| (-1.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn free_staple_is_gapped() {
        let (pair, _) = setup(4, 2, 0);
        let rep = staple_scan(&pair, 1.0, &RegionSpec::Band { lo: 0.25, hi: 0.75 }, 7).unwrap();
        assert_eq!(rep.implied_path_flow, 0);
        assert!(rep.min_over_path() > 1e-3, "{}", rep.to_text());
    }
}
