//! Result rows and the files a run leaves behind: `<mode>.csv`,
//! `<mode>.meta.txt` and, for flow runs, `<mode>.trajectories.txt`.
//! Column meanings are documented in `schema/results.csv.md`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::HarnessError;

/// One CSV line. Empty cells mean "not computed in this mode".
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultRow {
    pub config_hash: String,
    pub mode: String,
    pub dim: usize,
    pub n: usize,
    pub coarse_n: Option<usize>,
    pub q: Option<i64>,
    pub m: Option<f64>,
    pub sf_tracked: Option<i64>,
    pub sf_eta: Option<i64>,
    pub eta_t1: Option<i64>,
    pub eta_tminus1: Option<i64>,
    pub aps_prediction: Option<f64>,
    pub proxy_sf: Option<i64>,
    pub sf2: Option<u8>,
    pub sf2_grid: Option<u8>,
    pub sf2_v: Option<u8>,
    pub a: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub r3: Option<f64>,
    pub commutator: Option<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub min_abs_eig: Option<f64>,
    pub min_margin: Option<f64>,
    pub solves: Option<usize>,
    pub diagnostics: String,
    pub elapsed_ms: u128,
}

/// Header line, in struct order.
pub const COLUMNS: &[&str] = &[
    "config_hash",
    "mode",
    "dim",
    "n",
    "coarse_n",
    "q",
    "m",
    "sf_tracked",
    "sf_eta",
    "eta_t1",
    "eta_tminus1",
    "aps_prediction",
    "proxy_sf",
    "sf2",
    "sf2_grid",
    "sf2_v",
    "a",
    "r1",
    "r2",
    "r3",
    "commutator",
    "t",
    "s",
    "min_abs_eig",
    "min_margin",
    "solves",
    "diagnostics",
    "elapsed_ms",
];

pub fn to_csv(rows: &[ResultRow]) -> Result<String, HarnessError> {
    // explicit header so that a run with no rows still documents its columns
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(COLUMNS).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}

fn io(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(e.to_string())
}

/// Everything a run produced, before it is written.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// `key = value` lines for the metadata sidecar.
    pub meta: Vec<(String, String)>,
    /// Human-readable summary printed to stdout.
    pub summary: Vec<String>,
    pub trajectories: Option<String>,
    /// Extra files (name, contents), e.g. generated gauge fields.
    pub files: Vec<(String, String)>,
}

pub fn write_run(dir: &Path, mode: &str, out: &RunOutput) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, text: &str| -> Result<(), HarnessError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    put(format!("{mode}.csv"), &to_csv(&out.rows)?)?;
    let meta: String = out.meta.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    put(format!("{mode}.meta.txt"), &meta)?;
    if let Some(t) = &out.trajectories {
        put(format!("{mode}.trajectories.txt"), t)?;
    }
    for (name, text) in &out.files {
        put(name.clone(), text)?;
    }
    Ok(written)
}
