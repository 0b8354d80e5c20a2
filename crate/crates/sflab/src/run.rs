//! Mode execution. Jobs run in config order; parallelism lives inside each
//! job (t samples, staple points), so rows never depend on `--jobs`.

use std::time::Instant;

use sflab_core::combined::staple_scan;
use sflab_core::continuum::{aps_prediction_band, as_index, continuum_proxy_sf, Calibration};
use sflab_core::gauge::{topological_charge, GaugeFile, GENERATOR_TAG};
use sflab_core::interp::{build_interpolator, check_dw_commutator, check_props, loglog_slope, Transport};
use sflab_core::lattice::Geometry;
use sflab_core::problem::DwProblem;
use sflab_core::spectral::{eta_endpoints, mod2_flow, spectral_flow_tracked, HermitianFamily, Mod2Config};
use sflab_core::wall::RegionSpec;
use sflab_core::Error;

use crate::config::{ExperimentConfig, Mode, WallKind};
use crate::output::{ResultRow, RunOutput};
use crate::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Spectral-flow quantities of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SfOutcome {
    pub sf_tracked: i64,
    pub eta_t1: i64,
    pub eta_tminus1: i64,
    pub min_margin: f64,
    pub solves: usize,
    pub lipschitz: f64,
    pub trajectories: String,
}

impl SfOutcome {
    pub fn sf_eta(&self) -> Result<i64, HarnessError> {
        let diff = self.eta_t1 - self.eta_tminus1;
        if diff % 2 != 0 {
            return Err(Error::OddEtaDifference(diff).into());
        }
        Ok(diff / 2)
    }
}

pub fn flow_outcome<F: HermitianFamily>(
    family: &F,
    cfg: &sflab_core::spectral::FlowConfig,
) -> Result<SfOutcome, HarnessError> {
    let flow = spectral_flow_tracked(family, cfg)?;
    let [eta_tminus1, eta_t1] = eta_endpoints(family, cfg.zero_tol)?;
    Ok(SfOutcome {
        sf_tracked: flow.net,
        eta_t1,
        eta_tminus1,
        min_margin: flow.margins.iter().copied().fold(f64::INFINITY, f64::min),
        solves: flow.solves,
        lipschitz: flow.lipschitz,
        trajectories: flow.to_text(),
    })
}

/// Continuum index for the configuration, where a closed form exists.
pub fn aps_reference(problem: &DwProblem, n: usize) -> Result<Option<f64>, HarnessError> {
    if problem.dim != 2 {
        return Ok(None);
    }
    match problem.wall {
        RegionSpec::WholeTorus => Ok(Some(as_index(&problem.gauge(n)?)? as f64)),
        RegionSpec::Band { .. } => {
            let p = aps_prediction_band(&problem.gauge(n)?, &problem.wall(n)?, &Calibration::FROZEN)?;
            Ok(Some(p.predicted_index))
        }
        RegionSpec::Disk { .. } => Ok(None),
    }
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, i64, f64)> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        for &q in &cfg.q {
            for &m in &cfg.m {
                out.push((n, q, m));
            }
        }
    }
    out
}

fn base_row(cfg: &ExperimentConfig, mode: Mode, n: usize) -> ResultRow {
    ResultRow { config_hash: cfg.hash(), mode: mode.name().into(), dim: cfg.dim, n, ..Default::default() }
}

fn require_dw(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    if cfg.dim % 2 != 0 {
        return Err(HarnessError::Config(format!("mode needs an even dimension, got dim = {}", cfg.dim)));
    }
    Ok(())
}

fn sf_rows(cfg: &ExperimentConfig, mode: Mode, out: &mut RunOutput) -> Result<(), HarnessError> {
    require_dw(cfg)?;
    let mut traj = String::new();
    for (n, q, m) in jobs(cfg) {
        let start = Instant::now();
        let problem = cfg.problem(q, m);
        let o = flow_outcome(&problem.family(n)?, &cfg.flow_config(m))?;
        let proxy_sf = cfg.proxy_n.map(|fine| continuum_proxy_sf(&problem, n, fine)).transpose()?;
        let sf_eta = o.sf_eta()?;
        let mut diag = format!("lipschitz={:.6};eta_relation=", o.lipschitz);
        diag.push_str(match (o.sf_tracked == sf_eta, 2 * o.sf_tracked) {
            (false, _) => "tracked!=eta",
            (true, x) if x == -o.eta_t1 => "sf=-eta_t1/2",
            (true, x) if x == o.eta_t1 => "sf=+eta_t1/2",
            _ => "sf!=+-eta_t1/2",
        });
        traj.push_str(&format!("## config {} n={n} q={q} m={m}\n{}\n", cfg.hash(), o.trajectories));
        out.rows.push(ResultRow {
            q: Some(q),
            m: Some(m),
            sf_tracked: Some(o.sf_tracked),
            sf_eta: Some(sf_eta),
            eta_t1: Some(o.eta_t1),
            eta_tminus1: Some(o.eta_tminus1),
            aps_prediction: aps_reference(&problem, n)?,
            proxy_sf,
            min_margin: Some(o.min_margin),
            solves: Some(o.solves),
            diagnostics: diag,
            elapsed_ms: start.elapsed().as_millis(),
            ..base_row(cfg, mode, n)
        });
    }
    out.trajectories = Some(traj);
    Ok(())
}

fn eta_rows(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    require_dw(cfg)?;
    for (n, q, m) in jobs(cfg) {
        let start = Instant::now();
        let family = cfg.problem(q, m).family(n)?;
        let [em, ep] = eta_endpoints(&family, cfg.zero_tol)?;
        out.rows.push(ResultRow {
            q: Some(q),
            m: Some(m),
            eta_t1: Some(ep),
            eta_tminus1: Some(em),
            elapsed_ms: start.elapsed().as_millis(),
            ..base_row(cfg, Mode::Eta, n)
        });
    }
    Ok(())
}

/// Maximal runs of consecutive masses sharing one flow value.
pub fn plateaus(points: &[(f64, i64)]) -> Vec<(f64, f64, i64)> {
    let mut out: Vec<(f64, f64, i64)> = Vec::new();
    for &(m, sf) in points {
        match out.last_mut() {
            Some(last) if last.2 == sf => last.1 = m,
            _ => out.push((m, m, sf)),
        }
    }
    out
}

fn scan_summaries(cfg: &ExperimentConfig, mode: Mode, out: &mut RunOutput) -> Result<(), HarnessError> {
    match mode {
        Mode::ScanA => {
            if cfg.n.len() < 2 {
                return Err(HarnessError::Config("scan-a needs at least two values of n".into()));
            }
            for &q in &cfg.q {
                for &m in &cfg.m {
                    let sfs: Vec<(usize, i64)> = out
                        .rows
                        .iter()
                        .filter(|r| r.q == Some(q) && r.m == Some(m))
                        .map(|r| (r.n, r.sf_tracked.unwrap_or_default()))
                        .collect();
                    let same = sfs.windows(2).all(|w| w[0].1 == w[1].1);
                    let line = format!("q={q} m={m} sf by N {sfs:?} identical={same}");
                    out.meta.push((format!("scan_a.q{q}.m{m}"), format!("{sfs:?} identical={same}")));
                    out.summary.push(line);
                }
            }
        }
        Mode::ScanM => {
            if cfg.m.len() < 2 {
                return Err(HarnessError::Config("scan-m needs at least two masses".into()));
            }
            for &n in &cfg.n {
                for &q in &cfg.q {
                    let mut pts: Vec<(f64, i64)> = out
                        .rows
                        .iter()
                        .filter(|r| r.n == n && r.q == Some(q))
                        .map(|r| (r.m.unwrap_or_default(), r.sf_tracked.unwrap_or_default()))
                        .collect();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let runs = plateaus(&pts);
                    let text: Vec<String> =
                        runs.iter().map(|(lo, hi, sf)| format!("m in [{lo}, {hi}]: sf={sf}")).collect();
                    out.meta.push((format!("plateau.n{n}.q{q}"), text.join("; ")));
                    out.summary.push(format!("n={n} q={q}: {}", text.join("; ")));
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn mod2_rows(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    if cfg.dim % 2 == 0 {
        return Err(HarnessError::Config(format!("mod2 needs an odd dimension, got dim = {}", cfg.dim)));
    }
    let mc = Mod2Config { grid_points: cfg.t_points.max(33), ..Mod2Config::default() };
    for &n in &cfg.n {
        for &m in &cfg.m {
            let start = Instant::now();
            let r = mod2_flow(&cfg.real_problem(m)?.family(n)?, &mc)?;
            let mut diag = format!("det_signs={:?};consistent={}", r.endpoint_det_signs, r.consistent());
            if let Some(v) = &r.v_oracle {
                diag.push_str(&format!(";congruence_residual={:.3e}", v.congruence_residual));
            }
            if let Some(note) = &r.v_oracle_note {
                diag.push_str(&format!(";v_oracle={note}"));
            }
            out.rows.push(ResultRow {
                m: Some(m),
                sf2: Some(r.parity),
                sf2_grid: Some(r.tracked_parity),
                sf2_v: r.v_oracle.as_ref().map(|v| v.parity),
                diagnostics: diag,
                elapsed_ms: start.elapsed().as_millis(),
                ..base_row(cfg, Mode::Mod2, n)
            });
        }
    }
    Ok(())
}

fn interp_rows(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    require_dw(cfg)?;
    let q = cfg.q[0];
    let transport = Transport::for_background(&cfg.background(q))?;
    let spinor = cfg.problem(q, cfg.m[0]).rep()?.spinor_dim();
    let wall = cfg.region();
    let mut series: [Vec<(f64, f64)>; 4] = Default::default();
    for &nc in &cfg.coarse_n {
        let start = Instant::now();
        let coarse = Geometry::new(cfg.dim, nc, &cfg.bc, spinor)?;
        let fine = coarse.with_extent(nc * cfg.ratio)?;
        let pair = build_interpolator(&coarse, &fine, transport.clone())?;
        let props = check_props(&pair, cfg.trials, cfg.seed)?;
        let com = check_dw_commutator(&pair, &wall, cfg.trials, cfg.seed)?;
        let worst = com.ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        for (s, v) in series.iter_mut().zip([props.r1, props.r2, props.r3, worst]) {
            s.push((props.a, v));
        }
        out.rows.push(ResultRow {
            coarse_n: Some(nc),
            q: Some(q),
            a: Some(props.a),
            r1: Some(props.r1),
            r2: Some(props.r2),
            r3: Some(props.r3),
            commutator: Some(worst),
            diagnostics: format!(
                "adjoint_defect={:.3e};partition_residual={:.3e};overlap_identity={:.12}",
                props.adjoint_defect, props.partition_residual, props.overlap_identity
            ),
            elapsed_ms: start.elapsed().as_millis(),
            ..base_row(cfg, Mode::Interp, fine.extent())
        });
    }
    if cfg.coarse_n.len() >= 2 {
        for (name, s) in ["r1", "r2", "r3", "commutator"].iter().zip(&series) {
            let slope = if s.iter().all(|p| p.1 > 0.0) { loglog_slope(s) } else { f64::NAN };
            out.meta.push((format!("slope.{name}"), format!("{slope:.6}")));
            out.summary.push(format!("log-log slope of {name} against a: {slope:.4}"));
        }
    }
    Ok(())
}

fn staple_rows(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    require_dw(cfg)?;
    let (q, m) = (cfg.q[0], cfg.m[0]);
    let transport = Transport::for_background(&cfg.background(q))?;
    let spinor = cfg.problem(q, m).rep()?.spinor_dim();
    for &nc in &cfg.coarse_n {
        for &nf in &cfg.n {
            let start = Instant::now();
            let coarse = Geometry::new(cfg.dim, nc, &cfg.bc, spinor)?;
            let pair = build_interpolator(&coarse, &coarse.with_extent(nf)?, transport.clone())?;
            let rep = staple_scan(&pair, m, &cfg.region(), cfg.samples)?;
            let per = start.elapsed().as_millis() / rep.samples.len() as u128;
            for p in &rep.samples {
                out.rows.push(ResultRow {
                    coarse_n: Some(nc),
                    q: Some(q),
                    m: Some(m),
                    t: Some(p.t),
                    s: Some(p.s),
                    min_abs_eig: Some(p.min_abs_eig),
                    diagnostics: format!("eta={}", p.eta),
                    elapsed_ms: per,
                    ..base_row(cfg, Mode::Staple, nf)
                });
            }
            out.meta
                .push((format!("staple.coarse{nc}.fine{nf}.min_over_path"), format!("{:.6e}", rep.min_over_path())));
            out.meta.push((format!("staple.coarse{nc}.fine{nf}.implied_path_flow"), rep.implied_path_flow.to_string()));
            out.summary.push(format!(
                "coarse N={nc} fine N={nf}: min |eig| over {} samples {:.4e}; implied path flow {}",
                rep.samples.len(),
                rep.min_over_path(),
                rep.implied_path_flow
            ));
        }
    }
    Ok(())
}

fn gauge_rows(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    let seed = cfg.transform_seed.or(cfg.noise.map(|_| cfg.seed));
    for &n in &cfg.n {
        for &q in &cfg.q {
            let start = Instant::now();
            let geom = Geometry::new(cfg.dim, n, &cfg.bc, 1)?;
            let gauge = cfg.background(q).build(&geom)?;
            let charge = if cfg.dim == 2 { Some(topological_charge(&gauge)?) } else { None };
            let name = format!("gauge_d{}_n{n}_q{q}.json", cfg.dim);
            out.files.push((name.clone(), GaugeFile::from_gauge(&gauge, seed).to_string_pretty()?));
            out.rows.push(ResultRow {
                q: charge,
                diagnostics: format!("file={name};requested_q={q}"),
                elapsed_ms: start.elapsed().as_millis(),
                ..base_row(cfg, Mode::GaugeGen, n)
            });
        }
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, mode: Mode) -> Result<RunOutput, HarnessError> {
    cfg.check_mode(mode)?;
    let mut out = RunOutput::default();
    match mode {
        Mode::Sf | Mode::ScanA | Mode::ScanM => {
            sf_rows(cfg, mode, &mut out)?;
            scan_summaries(cfg, mode, &mut out)?;
        }
        Mode::Eta => eta_rows(cfg, &mut out)?,
        Mode::Mod2 => mod2_rows(cfg, &mut out)?,
        Mode::Interp => interp_rows(cfg, &mut out)?,
        Mode::Staple => staple_rows(cfg, &mut out)?,
        Mode::GaugeGen => gauge_rows(cfg, &mut out)?,
    }
    if matches!(cfg.wall, WallKind::Band) && cfg.dim == 2 {
        out.meta.push(("aps.calibration".into(), Calibration::FROZEN.tag()));
    }
    let mut meta = vec![
        ("tool".to_string(), format!("sflab {VERSION}")),
        ("library".to_string(), format!("sflab-core {}", sflab_core::VERSION)),
        ("eigensolver".to_string(), sflab_core::spectral::EIGEN_BACKEND.to_string()),
        ("calibration".to_string(), Calibration::FROZEN.tag()),
        ("generator".to_string(), GENERATOR_TAG.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("transform_seed".to_string(), format!("{:?}", cfg.transform_seed)),
        ("mode".to_string(), mode.name().to_string()),
        ("config_hash".to_string(), cfg.hash()),
    ];
    meta.extend(
        cfg.canonical().lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (format!("config.{k}"), v.to_string())),
    );
    meta.append(&mut out.meta);
    out.meta = meta;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_runs() {
        let p = plateaus(&[(0.5, 0), (1.0, 1), (2.0, 1), (4.0, 1), (8.0, 3)]);
        assert_eq!(p, vec![(0.5, 0.5, 0), (1.0, 4.0, 1), (8.0, 8.0, 3)]);
    }
}
