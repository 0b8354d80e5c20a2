//! WebAssembly entry points for the static demo page in `www/`. Every
//! function takes plain numbers and returns a JSON string, or a JSON
//! object with an `error` field.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;
use sflab_core::gauge::ContinuumLine;
use sflab_core::interp::{build_interpolator, Transport};
use sflab_core::lattice::Geometry;
use sflab_core::problem::{Background, DwProblem, GaugeSpec, RealDwProblem};
use sflab_core::spectral::{eta_endpoints, mod2_flow, spectral_flow_tracked, HermitianFamily, Mod2Config};
use sflab_core::wall::RegionSpec;
use sflab_core::C64;
use wasm_bindgen::prelude::*;

/// Largest extent the page may request; 2 N^2 = 288 keeps each dense
/// solve interactive.
const MAX_FLOW_N: usize = 12;

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[derive(Serialize)]
struct FlowView {
    t: Vec<f64>,
    /// Eigenvalues nearest zero at each `t`, ascending.
    eigs: Vec<Vec<f64>>,
    sf: i64,
    eta_minus: i64,
    eta_plus: i64,
    solves: usize,
}

fn flow(n: usize, q: i32, m: f64, band: bool, samples: usize, keep: usize) -> Result<FlowView, String> {
    if !(2..=MAX_FLOW_N).contains(&n) {
        return Err(format!("N must lie in 2..={MAX_FLOW_N}"));
    }
    let (wall, bc) = if band {
        (RegionSpec::Band { lo: 0.25, hi: 0.75 }, vec![0.0, PI])
    } else {
        (RegionSpec::WholeTorus, vec![0.0, 0.0])
    };
    let p = DwProblem {
        dim: 2,
        bc_phase: bc,
        background: Background::plain(GaugeSpec::UniformFlux { q: q as i64 }),
        wall,
        mass: m,
    };
    let family = p.family(n).map_err(|e| e.to_string())?;
    let tracked = spectral_flow_tracked(&family, &p.flow_config()).map_err(|e| e.to_string())?;
    let [eta_minus, eta_plus] = eta_endpoints(&family, 1e-10).map_err(|e| e.to_string())?;
    let samples = samples.clamp(2, 200);
    let t: Vec<f64> = (0..samples).map(|k| -1.0 + 2.0 * k as f64 / (samples - 1) as f64).collect();
    let eigs = t
        .iter()
        .map(|&s| {
            let mut spec = family.spectrum(s);
            spec.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            spec.truncate(keep.max(1));
            spec.sort_by(f64::total_cmp);
            spec
        })
        .collect();
    Ok(FlowView { t, eigs, sf: tracked.net, eta_minus, eta_plus, solves: tracked.solves })
}

/// Eigenvalues of `h(t)` nearest zero on a uniform `t` grid plus the
/// certified flow, for uniform flux `q` on an `n x n` torus.
#[wasm_bindgen]
pub fn flow_trajectories(n: usize, q: i32, m: f64, band: bool, samples: usize, keep: usize) -> String {
    respond(flow(n, q, m, band, samples, keep))
}

#[derive(Serialize)]
struct HatView {
    coarse_x: Vec<f64>,
    fine_x: Vec<f64>,
    /// Real and imaginary parts of the interpolated field.
    re: Vec<f64>,
    im: Vec<f64>,
}

fn hat(values: &[f64], ratio: usize, connection: f64) -> Result<HatView, String> {
    let n = values.len();
    if !(2..=64).contains(&n) || !(2..=16).contains(&ratio) {
        return Err("need 2..=64 coarse values and ratio 2..=16".into());
    }
    let coarse = Geometry::new(1, n, &[0.0], 1).map_err(|e| e.to_string())?;
    let fine = coarse.with_extent(n * ratio).map_err(|e| e.to_string())?;
    let tr = if connection == 0.0 {
        Transport::Trivial
    } else {
        Transport::ConstantConnection(ContinuumLine::new(vec![connection]).map_err(|e| e.to_string())?)
    };
    let pair = build_interpolator(&coarse, &fine, tr).map_err(|e| e.to_string())?;
    let phi: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let out = pair.apply(&phi);
    Ok(HatView {
        coarse_x: (0..n).map(|i| i as f64 / n as f64).collect(),
        fine_x: (0..n * ratio).map(|i| i as f64 / (n * ratio) as f64).collect(),
        re: out.iter().map(|z| z.re).collect(),
        im: out.iter().map(|z| z.im).collect(),
    })
}

/// Hat-function interpolation of a periodic 1-d coarse field onto a lattice
/// `ratio` times finer, with an optional constant connection.
#[wasm_bindgen]
pub fn hat_interpolation(values: Vec<f64>, ratio: usize, connection: f64) -> String {
    respond(hat(&values, ratio, connection))
}

#[derive(Serialize)]
struct DetView {
    t: Vec<f64>,
    sign: Vec<i8>,
    log_abs_det: Vec<f64>,
    parity: u8,
    tracked_parity: u8,
    v_parity: Option<u8>,
}

fn det_track(n: usize, m: f64, antiperiodic: bool, points: usize) -> Result<DetView, String> {
    if !(2..=64).contains(&n) {
        return Err("N must lie in 2..=64".into());
    }
    let p = RealDwProblem {
        dim: 1,
        bc_phase: vec![if antiperiodic { PI } else { 0.0 }],
        wall: RegionSpec::WholeTorus,
        mass: m,
    };
    let fam = p.family(n).map_err(|e| e.to_string())?;
    let cfg = Mod2Config { grid_points: points.clamp(2, 400), ..Mod2Config::default() };
    let r = mod2_flow(&fam, &cfg).map_err(|e| e.to_string())?;
    Ok(DetView {
        t: r.grid,
        sign: r.det_signs,
        log_abs_det: r.log_abs_dets,
        parity: r.parity,
        tracked_parity: r.tracked_parity,
        v_parity: r.v_oracle.map(|v| v.parity),
    })
}

/// `sgn det A(t)` and `log |det A(t)|` of the real 1-d family along a grid.
#[wasm_bindgen]
pub fn mod2_det_track(n: usize, m: f64, antiperiodic: bool, points: usize) -> String {
    respond(det_track(n, m, antiperiodic, points))
}
