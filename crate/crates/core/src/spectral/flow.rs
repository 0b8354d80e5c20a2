//! Spectral flow of a Hermitian family on `[-1, 1]`.
//!
//! The tracker builds a partition `t_0 = -1 < ... < t_n = 1` and levels
//! `lambda_1 .. lambda_n` with `lambda_1 = lambda_n = 0` such that `lambda_k`
//! is not an eigenvalue of `h(t)` for any `t` in `[t_{k-1}, t_k]`; then
//! `sf = sum_{0<k<n} sgn(lambda_k - lambda_{k+1}) d_k`, where `d_k` counts
//! eigenvalues of `h(t_k)` strictly between the two levels.
//!
//! A level is certified on a segment from the endpoint spectra alone: the
//! distance from `lambda` to the spectrum of `h(t)` is `L`-Lipschitz in `t`
//! (Weyl), so `dist(lambda, spec h(t_a)) + dist(lambda, spec h(t_b)) > L (t_b - t_a)`
//! rules out any crossing in between. Segments without a certified level
//! are bisected.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::eigen::eigvals_dense;
use super::eta::eta_from_spectrum;
use crate::{par_map, Error, Result, C64};

/// A continuous family `t -> h(t)` of Hermitian matrices of fixed size on
/// `[-1, 1]` with a known Lipschitz constant in operator norm.
pub trait HermitianFamily: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> DMatrix<C64>;
    fn lipschitz(&self) -> f64;
    fn spectrum(&self, t: f64) -> Vec<f64> {
        eigvals_dense(self.eval(t))
    }
}

/// `h(t) = (1 - t)/2 h(-1) + (1 + t)/2 h(1)`.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    start: DMatrix<C64>,
    end: DMatrix<C64>,
    lipschitz: f64,
}

impl AffineFamily {
    pub fn new(start: DMatrix<C64>, end: DMatrix<C64>) -> Result<Self> {
        if start.shape() != end.shape() || start.nrows() != start.ncols() {
            return Err(Error::InvalidArgument("endpoints must be square and of equal size".into()));
        }
        let slope = (&end - &start) * C64::new(0.5, 0.0);
        let lipschitz = eigvals_dense(slope).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(Self { start, end, lipschitz })
    }

    pub fn from_real(start: &[f64], end: &[f64], n: usize) -> Result<Self> {
        let c = |v: &[f64]| DMatrix::from_row_slice(n, n, &v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        Self::new(c(start), c(end))
    }
}

impl HermitianFamily for AffineFamily {
    fn dim(&self) -> usize {
        self.start.nrows()
    }

    fn eval(&self, t: f64) -> DMatrix<C64> {
        &self.start * C64::new(0.5 * (1.0 - t), 0.0) + &self.end * C64::new(0.5 * (1.0 + t), 0.0)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// `t -> h(-t)`.
pub struct ReversedFamily<'a, F: HermitianFamily>(pub &'a F);

impl<F: HermitianFamily> HermitianFamily for ReversedFamily<'_, F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, t: f64) -> DMatrix<C64> {
        self.0.eval(-t)
    }
    fn lipschitz(&self) -> f64 {
        self.0.lipschitz()
    }
    fn spectrum(&self, t: f64) -> Vec<f64> {
        self.0.spectrum(-t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Uniform starting partition, including both endpoints.
    pub initial_points: usize,
    /// Kernel threshold relative to the largest endpoint spectral radius.
    pub zero_tol: f64,
    /// Bisections allowed below an initial segment.
    pub max_depth: u32,
    /// The window half-width `Lambda_t` sits between the `window_rank`-th
    /// and next smallest `|eigenvalue|` ...
    pub window_rank: usize,
    /// ... unless this cap (normally `10 m`) is smaller.
    pub window_cap: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { initial_points: 9, zero_tol: super::ZERO_TOL, max_depth: 20, window_rank: 40, window_cap: None }
    }
}

impl FlowConfig {
    pub fn with_mass(m: f64) -> Self {
        Self { window_cap: Some(10.0 * m), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowResult {
    /// `t_0 .. t_n`.
    pub t_points: Vec<f64>,
    /// `lambda_1 .. lambda_n`; `levels[k]` belongs to `[t_k, t_{k+1}]`.
    pub levels: Vec<f64>,
    /// `sgn_k` and `d_k` at interior points `t_1 .. t_{n-1}`.
    pub signs: Vec<i8>,
    pub counts: Vec<usize>,
    pub net: i64,
    /// Certificate margin of each level.
    pub margins: Vec<f64>,
    /// Window half-width and windowed eigenvalues at each `t_k`.
    pub windows: Vec<f64>,
    pub trajectories: Vec<Vec<f64>>,
    pub lipschitz: f64,
    pub zero_tol_abs: f64,
    pub solves: usize,
}

fn dist(sorted: &[f64], x: f64) -> f64 {
    let i = sorted.partition_point(|&v| v < x);
    let mut d = f64::INFINITY;
    if i < sorted.len() {
        d = d.min(sorted[i] - x);
    }
    if i > 0 {
        d = d.min(x - sorted[i - 1]);
    }
    d
}

fn window(spec: &[f64], cfg: &FlowConfig, fallback: f64) -> f64 {
    let mut abs: Vec<f64> = spec.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let r = cfg.window_rank;
    let by_rank = if r >= 1 && abs.len() > r { 0.5 * (abs[r - 1] + abs[r]) } else { fallback };
    cfg.window_cap.map_or(by_rank, |c| c.min(by_rank))
}

struct Point {
    t: f64,
    spec: Vec<f64>,
    window: f64,
}

/// Best level on one segment and its margin; `forced` pins it to zero.
fn best_level(a: &Point, b: &Point, lip: f64, forced: bool) -> (f64, f64) {
    let span = lip * (b.t - a.t);
    let margin = |x: f64| dist(&a.spec, x) + dist(&b.spec, x) - span;
    if forced {
        return (0.0, margin(0.0));
    }
    let lam = a.window.min(b.window);
    // window edges act as sentinels so gaps beyond the extreme eigenvalues
    // are candidates too
    let bounded = |it: &mut dyn Iterator<Item = f64>| {
        let mut v: Vec<f64> = std::iter::once(-lam).chain(it.filter(|x| x.abs() < lam)).chain([lam]).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let lists = [
        bounded(&mut a.spec.iter().copied()),
        bounded(&mut b.spec.iter().copied()),
        bounded(&mut a.spec.iter().chain(&b.spec).copied()),
    ];
    let mut candidates = vec![0.0];
    for list in &lists {
        candidates.extend(list.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    }
    candidates.into_iter().filter(|x| x.abs() < lam).map(|x| (x, margin(x))).fold(
        (0.0, f64::NEG_INFINITY),
        |best, cand| {
            let better = cand.1 > best.1 || (cand.1 == best.1 && (cand.0.abs(), cand.0) < (best.0.abs(), best.0));
            if better {
                cand
            } else {
                best
            }
        },
    )
}

pub fn spectral_flow_tracked<F: HermitianFamily + ?Sized>(family: &F, cfg: &FlowConfig) -> Result<SpectralFlowResult> {
    if cfg.initial_points < 2 {
        return Err(Error::InvalidArgument("a partition needs at least 2 points".into()));
    }
    let lip = family.lipschitz();
    if !lip.is_finite() || lip < 0.0 {
        return Err(Error::InvalidArgument(format!("Lipschitz bound {lip} is not usable")));
    }
    let n0 = cfg.initial_points;
    let ts: Vec<f64> =
        (0..n0).map(|i| if i + 1 == n0 { 1.0 } else { -1.0 + 2.0 * i as f64 / (n0 - 1) as f64 }).collect();
    let mut specs = par_map(&ts, |&t| family.spectrum(t));
    let mut solves = specs.len();

    let radius = |s: &[f64]| s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let norm = radius(&specs[0]).max(radius(&specs[n0 - 1]));
    let tol = cfg.zero_tol * norm;
    for (t, s) in [(-1.0, &specs[0]), (1.0, &specs[n0 - 1])] {
        let min_abs = s.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        if min_abs <= tol {
            return Err(Error::EndpointKernel { t, min_abs });
        }
    }
    let fallback = 2.0 * norm.max(f64::MIN_POSITIVE);
    let mut points: Vec<Point> = ts
        .into_iter()
        .zip(specs.drain(..))
        .map(|(t, spec)| {
            let window = window(&spec, cfg, fallback);
            Point { t, spec, window }
        })
        .collect();
    let mut depth = vec![0u32; points.len() - 1];

    let levels = loop {
        let nseg = points.len() - 1;
        let fits: Vec<(f64, f64)> =
            (0..nseg).map(|k| best_level(&points[k], &points[k + 1], lip, k == 0 || k + 1 == nseg)).collect();
        let failing: Vec<usize> = (0..nseg).filter(|&k| fits[k].1 <= 10.0 * tol).collect();
        if failing.is_empty() {
            break fits;
        }
        if let Some(&k) = failing.iter().find(|&&k| depth[k] >= cfg.max_depth) {
            return Err(Error::RefinementExhausted { lo: points[k].t, hi: points[k + 1].t, margin: fits[k].1 });
        }
        let mids: Vec<f64> = failing.iter().map(|&k| 0.5 * (points[k].t + points[k + 1].t)).collect();
        let new_specs = par_map(&mids, |&t| family.spectrum(t));
        solves += new_specs.len();
        // insert from the back so earlier indices stay valid
        for ((&k, &t), spec) in failing.iter().zip(&mids).zip(new_specs).rev() {
            let w = window(&spec, cfg, fallback);
            points.insert(k + 1, Point { t, spec, window: w });
            let d = depth[k] + 1;
            depth[k] = d;
            depth.insert(k + 1, d);
        }
    };

    let lam: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let mut signs = Vec::with_capacity(lam.len().saturating_sub(1));
    let mut counts = Vec::with_capacity(signs.capacity());
    let mut net = 0i64;
    for k in 1..lam.len() {
        let (lo, hi) = if lam[k - 1] < lam[k] { (lam[k - 1], lam[k]) } else { (lam[k], lam[k - 1]) };
        let d = points[k].spec.iter().filter(|&&x| x > lo && x < hi).count();
        let s = match lam[k - 1].partial_cmp(&lam[k]) {
            Some(std::cmp::Ordering::Greater) => 1i8,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        };
        net += s as i64 * d as i64;
        signs.push(s);
        counts.push(d);
    }
    Ok(SpectralFlowResult {
        t_points: points.iter().map(|p| p.t).collect(),
        margins: levels.iter().map(|l| l.1).collect(),
        levels: lam,
        signs,
        counts,
        net,
        windows: points.iter().map(|p| p.window).collect(),
        trajectories: points.iter().map(|p| p.spec.iter().copied().filter(|x| x.abs() < p.window).collect()).collect(),
        lipschitz: lip,
        zero_tol_abs: tol,
        solves,
    })
}

/// `(eta(h(1)) - eta(h(-1))) / 2` from dense endpoint spectra.
pub fn spectral_flow_eta<F: HermitianFamily + ?Sized>(family: &F, zero_tol: f64) -> Result<i64> {
    let [lo, hi] = eta_endpoints(family, zero_tol)?;
    let diff = hi - lo;
    if diff % 2 != 0 {
        return Err(Error::OddEtaDifference(diff));
    }
    Ok(diff / 2)
}

/// `[eta(h(-1)), eta(h(1))]`; a kernel at either end is an error.
pub fn eta_endpoints<F: HermitianFamily + ?Sized>(family: &F, zero_tol: f64) -> Result<[i64; 2]> {
    let ends = [-1.0, 1.0];
    let specs = par_map(&ends, |&t| family.spectrum(t));
    let mut etas = [0i64; 2];
    for (i, (t, s)) in ends.iter().zip(&specs).enumerate() {
        etas[i] = eta_from_spectrum(s, zero_tol).map_err(|e| match e {
            Error::Kernel(min_abs) => Error::EndpointKernel { t: *t, min_abs },
            other => other,
        })?;
    }
    Ok(etas)
}

impl SpectralFlowResult {
    /// Plain-text report: summary, the segment table and the windowed
    /// eigenvalue trajectories.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        writeln!(w, "net {}", self.net).unwrap();
        writeln!(w, "lipschitz {:.17e}", self.lipschitz).unwrap();
        writeln!(w, "zero_tol_abs {:.17e}", self.zero_tol_abs).unwrap();
        writeln!(w, "solves {}", self.solves).unwrap();
        writeln!(w, "# segments: k t_start t_end level margin").unwrap();
        for k in 0..self.levels.len() {
            writeln!(
                w,
                "{} {:.17e} {:.17e} {:.17e} {:.6e}",
                k + 1,
                self.t_points[k],
                self.t_points[k + 1],
                self.levels[k],
                self.margins[k]
            )
            .unwrap();
        }
        writeln!(w, "# interior points: k t sgn d").unwrap();
        for k in 0..self.signs.len() {
            writeln!(w, "{} {:.17e} {} {}", k + 1, self.t_points[k + 1], self.signs[k], self.counts[k]).unwrap();
        }
        writeln!(w, "# trajectories: t window eigenvalues...").unwrap();
        for (k, tr) in self.trajectories.iter().enumerate() {
            write!(w, "{:.17e} {:.17e}", self.t_points[k], self.windows[k]).unwrap();
            for x in tr {
                write!(w, " {x:.17e}").unwrap();
            }
            writeln!(w).unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real_affine(a: &[f64], b: &[f64]) -> AffineFamily {
        let n = (a.len() as f64).sqrt() as usize;
        AffineFamily::from_real(a, b, n).unwrap()
    }

    #[test]
    fn scalar_crossing() {
        let f = real_affine(&[-1.0], &[1.0]);
        let r = spectral_flow_tracked(&f, &FlowConfig::default()).unwrap();
        assert_eq!(r.net, 1);
        assert_eq!(r.levels[0], 0.0);
        assert_eq!(*r.levels.last().unwrap(), 0.0);
        assert_eq!(r.counts.iter().sum::<usize>(), 1);
        assert_eq!(spectral_flow_eta(&f, 1e-10).unwrap(), 1);
        assert_eq!(spectral_flow_tracked(&ReversedFamily(&f), &FlowConfig::default()).unwrap().net, -1);
    }

    #[test]
    fn cancelling_pair() {
        let f = real_affine(&[-1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(spectral_flow_tracked(&f, &FlowConfig::default()).unwrap().net, 0);
    }

    #[test]
    fn constant_family() {
        let f = real_affine(&[2.0, 1.0, 1.0, -3.0], &[2.0, 1.0, 1.0, -3.0]);
        assert_eq!(spectral_flow_tracked(&f, &FlowConfig::default()).unwrap().net, 0);
        assert_eq!(spectral_flow_eta(&f, 1e-10).unwrap(), 0);
    }

    #[test]
    fn endpoint_kernel_reported() {
        let f = real_affine(&[0.0], &[1.0]);
        assert!(
            matches!(spectral_flow_tracked(&f, &FlowConfig::default()), Err(Error::EndpointKernel { t, .. }) if t == -1.0)
        );
        assert!(matches!(spectral_flow_eta(&f, 1e-10), Err(Error::EndpointKernel { .. })));
    }

    /// Invertible everywhere, but with a Lipschitz bound so loose that no
    /// segment of reachable width can be certified.
    struct Steep;
    impl HermitianFamily for Steep {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, t: f64) -> DMatrix<C64> {
            DMatrix::from_element(1, 1, C64::new(t + 2.0, 0.0))
        }
        fn lipschitz(&self) -> f64 {
            1e9
        }
    }

    #[test]
    fn refinement_exhausts_under_a_loose_bound() {
        let cfg = FlowConfig { max_depth: 6, ..FlowConfig::default() };
        assert!(matches!(spectral_flow_tracked(&Steep, &cfg), Err(Error::RefinementExhausted { .. })));
    }

    #[test]
    fn text_report_has_tables() {
        let f = real_affine(&[-1.0], &[1.0]);
        let txt = spectral_flow_tracked(&f, &FlowConfig::default()).unwrap().to_text();
        assert!(txt.starts_with("net 1\n"));
        assert!(txt.contains("# segments"));
        assert!(txt.contains("# trajectories"));
    }

    fn herm(n: usize, v: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::from_fn(n, n, |r, c| C64::new(v[r * n + c], v[c * n + r] * 0.3));
        m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn tracked_matches_eta_and_is_refinement_stable(
            a in prop::collection::vec(-2.0f64..2.0, 36),
            b in prop::collection::vec(-2.0f64..2.0, 36),
            pts in 2usize..12,
        ) {
            let fam = AffineFamily::new(herm(6, &a), herm(6, &b)).unwrap();
            let Ok(eta) = spectral_flow_eta(&fam, 1e-10) else { return Ok(()); };
            let cfg = FlowConfig { initial_points: pts, ..FlowConfig::default() };
            let r = spectral_flow_tracked(&fam, &cfg).unwrap();
            prop_assert_eq!(r.net, eta);
            let fine = FlowConfig { initial_points: 2 * pts - 1, ..cfg.clone() };
            prop_assert_eq!(spectral_flow_tracked(&fam, &fine).unwrap().net, r.net);
            prop_assert_eq!(spectral_flow_tracked(&ReversedFamily(&fam), &cfg).unwrap().net, -r.net);
            prop_assert_eq!(r.signs.iter().zip(&r.counts).map(|(s, d)| *s as i64 * *d as i64).sum::<i64>(), r.net);
        }
    }
}
