//! One experiment per file, flat `key = value` lines, `#` comments, lists
//! as comma-separated values. Unknown and repeated keys are rejected.
//!
//! ```text
//! mode = sf
//! n = 16
//! bc = 0, pi
//! gauge = uniform-flux
//! q = -2, -1, 0, 1, 2
//! wall = band
//! wall_range = 0.25, 0.75
//! m = 1.0
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sflab_core::problem::{Background, DwProblem, GaugeSpec, RealDwProblem};
use sflab_core::spectral::FlowConfig;
use sflab_core::wall::RegionSpec;
use sha2::{Digest, Sha256};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Sf,
    Mod2,
    Eta,
    ScanA,
    ScanM,
    Interp,
    Staple,
    GaugeGen,
}

impl Mode {
    pub const ALL: [Mode; 8] =
        [Mode::Sf, Mode::Mod2, Mode::Eta, Mode::ScanA, Mode::ScanM, Mode::Interp, Mode::Staple, Mode::GaugeGen];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Sf => "sf",
            Mode::Mod2 => "mod2",
            Mode::Eta => "eta",
            Mode::ScanA => "scan-a",
            Mode::ScanM => "scan-m",
            Mode::Interp => "interp",
            Mode::Staple => "staple",
            Mode::GaugeGen => "gauge-gen",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    Trivial,
    UniformFlux,
    LocalizedFlux,
    WilsonLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallKind {
    Whole,
    Band,
    Disk,
}

/// A parsed and validated experiment. Lists (`n`, `q`, `m`) are swept as a
/// Cartesian product in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub dim: usize,
    pub n: Vec<usize>,
    pub bc: Vec<f64>,
    pub gauge: GaugeKind,
    pub q: Vec<i64>,
    pub flux_cols: (f64, f64),
    pub alpha: Vec<f64>,
    pub transform_seed: Option<u64>,
    pub noise: Option<f64>,
    pub wall: WallKind,
    pub wall_range: (f64, f64),
    pub disk_center: Vec<f64>,
    pub disk_radius: f64,
    pub m: Vec<f64>,
    pub t_points: usize,
    pub max_depth: u32,
    pub zero_tol: f64,
    pub proxy_n: Option<usize>,
    pub coarse_n: Vec<usize>,
    pub ratio: usize,
    pub samples: usize,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "mode",
    "dim",
    "n",
    "bc",
    "gauge",
    "q",
    "flux_cols",
    "alpha",
    "transform_seed",
    "noise",
    "wall",
    "wall_range",
    "disk_center",
    "disk_radius",
    "m",
    "t_points",
    "max_depth",
    "zero_tol",
    "proxy_n",
    "coarse_n",
    "ratio",
    "samples",
    "trials",
    "seed",
    "out",
];

fn bad(key: &str, msg: impl fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{key}: {msg}"))
}

/// Reals, with `pi`, `-pi` and `<x>pi` accepted for boundary phases.
fn real(key: &str, s: &str) -> Result<f64, HarnessError> {
    let s = s.trim();
    if let Some(coef) = s.strip_suffix("pi") {
        let c = match coef.trim() {
            "" => 1.0,
            "-" => -1.0,
            c => c.trim_end_matches('*').parse::<f64>().map_err(|e| bad(key, format!("'{s}': {e}")))?,
        };
        return Ok(c * PI);
    }
    let v = s.parse::<f64>().map_err(|e| bad(key, format!("'{s}': {e}")))?;
    if !v.is_finite() {
        return Err(bad(key, format!("'{s}' is not finite")));
    }
    Ok(v)
}

fn int<T: FromStr>(key: &str, s: &str) -> Result<T, HarnessError>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| bad(key, format!("'{}': {e}", s.trim())))
}

fn list<T>(key: &str, s: &str, f: impl Fn(&str, &str) -> Result<T, HarnessError>) -> Result<Vec<T>, HarnessError> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(bad(key, "empty list element"));
    }
    items.into_iter().map(|i| f(key, i)).collect()
}

fn pair(key: &str, s: &str) -> Result<(f64, f64), HarnessError> {
    match list(key, s, real)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        other => Err(bad(key, format!("expected 2 values, got {}", other.len()))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut raw = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(HarnessError::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if v.is_empty() {
                return Err(HarnessError::Config(format!("line {}: empty value for '{k}'", lineno + 1)));
            }
            if raw.insert(k.to_string(), v.to_string()).is_some() {
                return Err(HarnessError::Config(format!("line {}: repeated key '{k}'", lineno + 1)));
            }
        }
        let get = |k: &str| raw.get(k).map(String::as_str);

        let dim = get("dim").map(|v| int::<usize>("dim", v)).transpose()?.unwrap_or(2);
        let cfg = ExperimentConfig {
            mode: get("mode").map(|v| v.parse::<Mode>().map_err(|e| bad("mode", e))).transpose()?,
            dim,
            n: get("n").map(|v| list("n", v, int)).transpose()?.unwrap_or_else(|| vec![16]),
            bc: match get("bc") {
                Some(v) => list("bc", v, real)?,
                None => vec![0.0; dim],
            },
            gauge: match get("gauge").unwrap_or("trivial") {
                "trivial" => GaugeKind::Trivial,
                "uniform-flux" => GaugeKind::UniformFlux,
                "localized-flux" => GaugeKind::LocalizedFlux,
                "wilson-line" => GaugeKind::WilsonLine,
                other => return Err(bad("gauge", format!("unknown kind '{other}'"))),
            },
            q: get("q").map(|v| list("q", v, int)).transpose()?.unwrap_or_else(|| vec![0]),
            flux_cols: get("flux_cols").map(|v| pair("flux_cols", v)).transpose()?.unwrap_or((0.0, 1.0)),
            alpha: get("alpha").map(|v| list("alpha", v, real)).transpose()?.unwrap_or_else(|| vec![0.0; dim]),
            transform_seed: get("transform_seed").map(|v| int("transform_seed", v)).transpose()?,
            noise: get("noise").map(|v| real("noise", v)).transpose()?,
            wall: match get("wall").unwrap_or("whole") {
                "whole" => WallKind::Whole,
                "band" => WallKind::Band,
                "disk" => WallKind::Disk,
                other => return Err(bad("wall", format!("unknown kind '{other}'"))),
            },
            wall_range: get("wall_range").map(|v| pair("wall_range", v)).transpose()?.unwrap_or((0.25, 0.75)),
            disk_center: get("disk_center")
                .map(|v| list("disk_center", v, real))
                .transpose()?
                .unwrap_or_else(|| vec![0.5; dim]),
            disk_radius: get("disk_radius").map(|v| real("disk_radius", v)).transpose()?.unwrap_or(0.25),
            m: get("m").map(|v| list("m", v, real)).transpose()?.unwrap_or_else(|| vec![1.0]),
            t_points: get("t_points").map(|v| int("t_points", v)).transpose()?.unwrap_or(9),
            max_depth: get("max_depth").map(|v| int("max_depth", v)).transpose()?.unwrap_or(20),
            zero_tol: get("zero_tol").map(|v| real("zero_tol", v)).transpose()?.unwrap_or(1e-10),
            proxy_n: get("proxy_n").map(|v| int("proxy_n", v)).transpose()?,
            coarse_n: get("coarse_n").map(|v| list("coarse_n", v, int)).transpose()?.unwrap_or_else(|| vec![8]),
            ratio: get("ratio").map(|v| int("ratio", v)).transpose()?.unwrap_or(4),
            samples: get("samples").map(|v| int("samples", v)).transpose()?.unwrap_or(20),
            trials: get("trials").map(|v| int("trials", v)).transpose()?.unwrap_or(4),
            seed: get("seed").map(|v| int("seed", v)).transpose()?.unwrap_or(0),
            out: get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let fail = |k: &str, m: String| Err(bad(k, m));
        if self.dim == 0 {
            return fail("dim", "must be positive".into());
        }
        if self.bc.len() != self.dim {
            return fail("bc", format!("needs {} values, got {}", self.dim, self.bc.len()));
        }
        if self.n.iter().any(|&n| n < 2) || self.coarse_n.iter().any(|&n| n < 2) {
            return fail("n", "lattice extents must be at least 2".into());
        }
        if let Some(&m) = self.m.iter().find(|&&m| m <= 0.0) {
            return fail("m", format!("mass must be positive, got {m}"));
        }
        if self.gauge == GaugeKind::WilsonLine && self.alpha.len() != self.dim {
            return fail("alpha", format!("needs {} values", self.dim));
        }
        if self.wall == WallKind::Disk && self.disk_center.len() != self.dim {
            return fail("disk_center", format!("needs {} values", self.dim));
        }
        if let Some(eps) = self.noise {
            if !(0.0..=0.05).contains(&eps) {
                return fail("noise", format!("{eps} outside [0, 0.05]"));
            }
        }
        if self.t_points < 2 {
            return fail("t_points", "need at least the two endpoints".into());
        }
        if !(self.zero_tol > 0.0 && self.zero_tol < 1e-2) {
            return fail("zero_tol", format!("{} outside (0, 1e-2)", self.zero_tol));
        }
        if self.ratio < 2 {
            return fail("ratio", "fine lattice must be at least twice as fine".into());
        }
        if self.samples < 2 {
            return fail("samples", "need at least the two staple ends".into());
        }
        Ok(())
    }

    /// Mode from the command line; a `mode` key in the file must agree.
    pub fn check_mode(&self, mode: Mode) -> Result<(), HarnessError> {
        match self.mode {
            Some(m) if m != mode => {
                Err(HarnessError::Config(format!("file declares mode '{m}' but '{mode}' was requested")))
            }
            _ => Ok(()),
        }
    }

    /// Every field in fixed order; the hash below is taken over this text.
    pub fn canonical(&self) -> String {
        fn join<T: fmt::Debug>(v: &[T]) -> String {
            v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
        }
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        put("mode", self.mode.map(|m| m.name().to_string()).unwrap_or_default());
        put("dim", self.dim.to_string());
        put("n", join(&self.n));
        put("bc", join(&self.bc));
        put("gauge", format!("{:?}", self.gauge));
        put("q", join(&self.q));
        put("flux_cols", format!("{:?}", self.flux_cols));
        put("alpha", join(&self.alpha));
        put("transform_seed", format!("{:?}", self.transform_seed));
        put("noise", format!("{:?}", self.noise));
        put("wall", format!("{:?}", self.wall));
        put("wall_range", format!("{:?}", self.wall_range));
        put("disk_center", join(&self.disk_center));
        put("disk_radius", format!("{:?}", self.disk_radius));
        put("m", join(&self.m));
        put("t_points", self.t_points.to_string());
        put("max_depth", self.max_depth.to_string());
        put("zero_tol", format!("{:?}", self.zero_tol));
        put("proxy_n", format!("{:?}", self.proxy_n));
        put("coarse_n", join(&self.coarse_n));
        put("ratio", self.ratio.to_string());
        put("samples", self.samples.to_string());
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        s
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn background(&self, q: i64) -> Background {
        let gauge = match self.gauge {
            GaugeKind::Trivial => GaugeSpec::Trivial,
            GaugeKind::UniformFlux => GaugeSpec::UniformFlux { q },
            GaugeKind::LocalizedFlux => GaugeSpec::LocalizedFlux { q, lo: self.flux_cols.0, hi: self.flux_cols.1 },
            GaugeKind::WilsonLine => GaugeSpec::WilsonLine { alpha: self.alpha.clone() },
        };
        Background { gauge, transform_seed: self.transform_seed, noise: self.noise.map(|eps| (eps, self.seed)) }
    }

    pub fn region(&self) -> RegionSpec {
        match self.wall {
            WallKind::Whole => RegionSpec::WholeTorus,
            WallKind::Band => RegionSpec::Band { lo: self.wall_range.0, hi: self.wall_range.1 },
            WallKind::Disk => RegionSpec::Disk { center: self.disk_center.clone(), radius: self.disk_radius },
        }
    }

    pub fn problem(&self, q: i64, m: f64) -> DwProblem {
        DwProblem {
            dim: self.dim,
            bc_phase: self.bc.clone(),
            background: self.background(q),
            wall: self.region(),
            mass: m,
        }
    }

    pub fn real_problem(&self, m: f64) -> Result<RealDwProblem, HarnessError> {
        if self.gauge != GaugeKind::Trivial || self.noise.is_some() || self.transform_seed.is_some() {
            return Err(HarnessError::Config("mod2 runs on the trivial real background only".into()));
        }
        Ok(RealDwProblem { dim: self.dim, bc_phase: self.bc.clone(), wall: self.region(), mass: m })
    }

    pub fn flow_config(&self, m: f64) -> FlowConfig {
        FlowConfig {
            initial_points: self.t_points,
            zero_tol: self.zero_tol,
            max_depth: self.max_depth,
            ..FlowConfig::with_mass(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_phases() {
        let c = ExperimentConfig::parse(
            "# band run\nmode = sf\nn = 16, 32\nbc = 0, pi\ngauge = uniform-flux\nq = 0,1, 2\nwall = band\nm = 1.0 # mass\n",
        )
        .unwrap();
        assert_eq!(c.mode, Some(Mode::Sf));
        assert_eq!(c.n, vec![16, 32]);
        assert_eq!(c.bc, vec![0.0, PI]);
        assert_eq!(c.q, vec![0, 1, 2]);
        assert_eq!(c.region(), RegionSpec::Band { lo: 0.25, hi: 0.75 });
        assert_eq!(real("bc", "-pi").unwrap(), -PI);
        assert_eq!(real("bc", "0.5pi").unwrap(), 0.5 * PI);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "colour = red",
            "n = 16\nn = 32",
            "m = 0",
            "m = -1, 2",
            "n = 16,,32",
            "bc = 0",
            "gauge = instanton",
            "just text",
            "zero_tol = 0.5",
            "mode = fly",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(HarnessError::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_tracks_content_not_layout() {
        let a = ExperimentConfig::parse("n = 8\nq = 1").unwrap();
        let b = ExperimentConfig::parse("# same\nq=1\n\nn =8").unwrap();
        let c = ExperimentConfig::parse("n = 8\nq = 2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn mode_key_must_match_command() {
        let c = ExperimentConfig::parse("mode = eta").unwrap();
        assert!(c.check_mode(Mode::Eta).is_ok());
        assert!(c.check_mode(Mode::Sf).is_err());
        assert!(ExperimentConfig::parse("").unwrap().check_mode(Mode::Sf).is_ok());
    }
}
