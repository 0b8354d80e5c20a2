//! Mod-two spectral flow of real families `A(t)` through the doubled
//! symmetric operators `H(t) = [[0, A], [A^T, 0]]`.
//!
//! Three routes to the same parity:
//! * endpoint determinant signs, `sgn det A(-1) * sgn det A(1)`;
//! * sign changes of `det A(t)` along a grid;
//! * the congruence oracle: with `A = U S W^T`, `R = diag(S^{1/2} U^T, S^{1/2} W^T)`
//!   gives `H = R^T J R`, `J = [[0, I], [I, 0]]`, at both endpoints, and
//!   `V = R_{-1}^{-1} R_{1}` satisfies `V^T H(-1) V = H(1)`; the parity is
//!   `(1 - sgn det V)/2`.

use nalgebra::DMatrix;

use super::eigen::eigvals_dense;
use crate::{par_map, Error, Result};

pub trait RealFamily: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> DMatrix<f64>;
}

/// `A(t) = (1 - t)/2 A(-1) + (1 + t)/2 A(1)`.
#[derive(Debug, Clone)]
pub struct RealAffineFamily {
    start: DMatrix<f64>,
    end: DMatrix<f64>,
}

impl RealAffineFamily {
    pub fn new(start: DMatrix<f64>, end: DMatrix<f64>) -> Result<Self> {
        if start.shape() != end.shape() || start.nrows() != start.ncols() {
            return Err(Error::InvalidArgument("endpoints must be square and of equal size".into()));
        }
        Ok(Self { start, end })
    }
}

impl RealFamily for RealAffineFamily {
    fn dim(&self) -> usize {
        self.start.nrows()
    }
    fn eval(&self, t: f64) -> DMatrix<f64> {
        &self.start * (0.5 * (1.0 - t)) + &self.end * (0.5 * (1.0 + t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mod2Config {
    pub grid_points: usize,
    /// Endpoints need a smallest singular value above this.
    pub singular_tol: f64,
    pub run_v_oracle: bool,
}

impl Default for Mod2Config {
    fn default() -> Self {
        Self { grid_points: 33, singular_tol: 1e-10, run_v_oracle: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VOracle {
    pub det_sign: i8,
    pub parity: u8,
    /// `(#positive, #negative)` of `H(-1)` and `H(1)`.
    pub inertia: [(usize, usize); 2],
    /// `max |V^T H(-1) V - H(1)| / max |H(1)|`.
    pub congruence_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mod2FlowResult {
    pub parity: u8,
    pub endpoint_det_signs: [i8; 2],
    pub endpoint_log_abs_det: [f64; 2],
    pub grid: Vec<f64>,
    pub det_signs: Vec<i8>,
    pub log_abs_dets: Vec<f64>,
    pub sign_changes: usize,
    pub tracked_parity: u8,
    pub v_oracle: Option<VOracle>,
    pub v_oracle_note: Option<String>,
}

/// Sign and `log |det|` from a partially pivoted LU factorization.
pub(crate) fn det_sign_log(m: DMatrix<f64>) -> (i8, f64) {
    let lu = m.lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        sign *= d.signum();
        log += d.abs().ln();
    }
    (sign as i8, log)
}

fn doubled(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(a);
    h.view_mut((n, 0), (n, n)).copy_from(&a.transpose());
    h
}

fn inertia(h: &DMatrix<f64>) -> (usize, usize) {
    let ev = eigvals_dense(h.clone());
    let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = super::ZERO_TOL * scale;
    (ev.iter().filter(|&&x| x > tol).count(), ev.iter().filter(|&&x| x < -tol).count())
}

/// Congruence factor `R` with `H = R^T J R`.
fn congruence_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let wt = svd.v_t.expect("requested V^T");
    let root = DMatrix::from_diagonal(&svd.singular_values.map(f64::sqrt));
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    r.view_mut((0, 0), (n, n)).copy_from(&(&root * u.transpose()));
    r.view_mut((n, n), (n, n)).copy_from(&(&root * wt));
    r
}

fn v_oracle(a_minus: &DMatrix<f64>, a_plus: &DMatrix<f64>) -> std::result::Result<VOracle, String> {
    let (hm, hp) = (doubled(a_minus), doubled(a_plus));
    let inertia = [inertia(&hm), inertia(&hp)];
    if inertia[0] != inertia[1] {
        return Err(format!("inertia mismatch: {:?} at t = -1, {:?} at t = 1", inertia[0], inertia[1]));
    }
    let rm = congruence_factor(a_minus);
    let rp = congruence_factor(a_plus);
    let rm_inv = rm.try_inverse().ok_or("congruence factor at t = -1 is singular")?;
    let v = rm_inv * rp;
    let back = v.transpose() * &hm * &v;
    let scale = hp.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let congruence_residual = (back - &hp).iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale;
    let (det_sign, _) = det_sign_log(v);
    if det_sign == 0 {
        return Err("V is numerically singular".into());
    }
    Ok(VOracle { det_sign, parity: u8::from(det_sign < 0), inertia, congruence_residual })
}

pub fn mod2_flow<F: RealFamily + ?Sized>(family: &F, cfg: &Mod2Config) -> Result<Mod2FlowResult> {
    if cfg.grid_points < 2 {
        return Err(Error::InvalidArgument("the determinant grid needs at least 2 points".into()));
    }
    let n = cfg.grid_points;
    let grid: Vec<f64> =
        (0..n).map(|i| if i + 1 == n { 1.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 }).collect();
    let a_minus = family.eval(-1.0);
    let a_plus = family.eval(1.0);
    for (t, a) in [(-1.0, &a_minus), (1.0, &a_plus)] {
        let sigma_min = a.clone().singular_values().iter().fold(f64::INFINITY, |m, &x| m.min(x));
        if sigma_min <= cfg.singular_tol {
            return Err(Error::SingularEndpoint { t, sigma_min });
        }
    }
    let dets = par_map(&grid, |&t| det_sign_log(family.eval(t)));
    let det_signs: Vec<i8> = dets.iter().map(|d| d.0).collect();
    let nonzero: Vec<i8> = det_signs.iter().copied().filter(|&s| s != 0).collect();
    let sign_changes = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    let endpoint_det_signs = [det_signs[0], det_signs[n - 1]];
    let parity = u8::from(endpoint_det_signs[0] * endpoint_det_signs[1] < 0);
    let (v_oracle, v_oracle_note) = if cfg.run_v_oracle {
        match v_oracle(&a_minus, &a_plus) {
            Ok(v) => (Some(v), None),
            Err(note) => (None, Some(note)),
        }
    } else {
        (None, Some("not requested".to_string()))
    };
    Ok(Mod2FlowResult {
        parity,
        endpoint_det_signs,
        endpoint_log_abs_det: [dets[0].1, dets[n - 1].1],
        grid,
        det_signs,
        log_abs_dets: dets.iter().map(|d| d.1).collect(),
        sign_changes,
        tracked_parity: (sign_changes % 2) as u8,
        v_oracle,
        v_oracle_note,
    })
}

impl Mod2FlowResult {
    /// True when every route that ran gives the same parity.
    pub fn consistent(&self) -> bool {
        self.parity == self.tracked_parity && self.v_oracle.as_ref().is_none_or(|v| v.parity == self.parity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> RealAffineFamily {
        RealAffineFamily::new(DMatrix::from_element(1, 1, -1.0), DMatrix::from_element(1, 1, 1.0)).unwrap()
    }

    #[test]
    fn scalar_family_has_odd_parity() {
        let r = mod2_flow(&scalar(), &Mod2Config::default()).unwrap();
        assert_eq!(r.parity, 1);
        assert_eq!(r.endpoint_det_signs, [-1, 1]);
        assert_eq!(r.tracked_parity, 1);
        let v = r.v_oracle.as_ref().unwrap();
        assert_eq!(v.parity, 1);
        assert!(v.congruence_residual < 1e-12);
        assert!(r.consistent());
    }

    #[test]
    fn rotation_keeps_parity_even() {
        // A(t) rotates by pi: det stays 1
        struct Rot;
        impl RealFamily for Rot {
            fn dim(&self) -> usize {
                2
            }
            fn eval(&self, t: f64) -> DMatrix<f64> {
                let th = std::f64::consts::FRAC_PI_2 * (t + 1.0);
                DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()])
            }
        }
        let r = mod2_flow(&Rot, &Mod2Config::default()).unwrap();
        assert_eq!(r.parity, 0);
        assert_eq!(r.sign_changes, 0);
        assert_eq!(r.v_oracle.unwrap().parity, 0);
    }

    #[test]
    fn singular_endpoint_rejected() {
        let f = RealAffineFamily::new(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!(matches!(mod2_flow(&f, &Mod2Config::default()), Err(Error::SingularEndpoint { .. })));
    }

    #[test]
    fn lu_sign_matches_determinant() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 0.0, 3.0, 4.0, 1.0, 0.0]);
        let (s, log) = det_sign_log(m.clone());
        let d = m.determinant();
        assert_eq!(s as f64, d.signum());
        assert!((log - d.abs().ln()).abs() < 1e-12);
    }
}
