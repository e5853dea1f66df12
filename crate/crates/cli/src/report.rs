//! Reports: a JSON document, a plain-text summary and, for scans, a CSV table.
//! Output is byte-stable: maps are ordered, phases are exact `p/q` strings and
//! floats are rounded to a fixed number of significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{GridRow, Mode};
use crate::error::CliError;

pub const VERDICT_ANOMALOUS: &str = "verdict: Anomalous — no G-invariant gapped ground state possible (Theorem 4.4)";
pub const VERDICT_TRIVIAL: &str = "verdict: NonAnomalous — the anomaly index vanishes";
pub const CSV_HEADER: &str = "N,J,a,E0,E1,E2,gap,gap2,charge_re,charge_im";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    #[serde(flatten)]
    pub body: Body,
    #[serde(skip)]
    pub summary: String,
    #[serde(skip)]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Body {
    Anomaly(AnomalyJson),
    Lsm(LsmJson),
    Cohomology(CohomologyJson),
    Gnvw(GnvwJson),
    Spectra(SpectraJson),
    Selftest(SelftestJson),
}

/// Prime → exponent of a GNVW index.
pub type IndexJson = BTreeMap<String, i64>;

#[derive(Clone, Debug, Serialize)]
pub struct GroupJson {
    pub name: String,
    pub order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaJson<A> {
    pub args: A,
    pub phase: String,
    pub snap_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CochainEntryJson {
    pub args: Vec<usize>,
    pub phase: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnomalyJson {
    pub group: GroupJson,
    pub side: String,
    pub gnvw: Vec<IndexJson>,
    pub stacked: bool,
    pub omega: Vec<OmegaJson<Vec<usize>>>,
    pub cohomology: String,
    pub invariant_factors: Vec<u64>,
    pub class: Vec<u64>,
    pub verdict: String,
    pub diagnostics: DiagnosticsJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsJson {
    pub homomorphism_residual: f64,
    pub max_v_residual: f64,
    pub max_scalar_deviation: f64,
    pub max_snap_error: f64,
    pub v_windows: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LsmJson {
    pub group: GroupJson,
    pub side: String,
    pub translation_index: IndexJson,
    pub stacked_index: IndexJson,
    pub omega: Vec<OmegaJson<[[i64; 2]; 3]>>,
    pub slant: Vec<CochainEntryJson>,
    pub rho: Vec<CochainEntryJson>,
    pub cohomology: String,
    pub invariant_factors: Vec<u64>,
    pub slant_class: Vec<u64>,
    pub rho_class: Vec<u64>,
    pub classes_agree: bool,
    pub verdict: String,
    pub diagnostics: DiagnosticsJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyJson {
    pub group: GroupJson,
    pub degree: usize,
    pub cohomology: String,
    pub invariant_factors: Vec<u64>,
    pub generators: Vec<Vec<CochainEntryJson>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GnvwEntryJson {
    pub element: String,
    pub symbolic: IndexJson,
    pub numeric: Option<IndexJson>,
    pub dim_right: Option<usize>,
    pub dim_left: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GnvwJson {
    pub elements: Vec<GnvwEntryJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumJson {
    #[serde(flatten)]
    pub row: GridRow,
    pub symmetric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendJson {
    pub j: f64,
    pub a: f64,
    pub terms: Vec<crate::config::TermName>,
    pub trend: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectraJson {
    pub k: usize,
    pub rows: Vec<SpectrumJson>,
    pub trends: Vec<TrendJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestJson {
    pub checks: Vec<CheckJson>,
    pub passed: bool,
}

impl Report {
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Write `<name>.json`, `<name>.txt` and, for scans, `<name>.csv` into `dir`.
    pub fn emit(&self, dir: &Path, name: &str) -> Result<Vec<PathBuf>, CliError> {
        if !dir.is_dir() {
            return Err(CliError::Io {
                path: dir.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
            });
        }
        let mut files = vec![
            (dir.join(format!("{name}.json")), self.json()),
            (dir.join(format!("{name}.txt")), self.summary.clone()),
        ];
        if let Some(csv) = &self.csv {
            files.push((dir.join(format!("{name}.csv")), csv.clone()));
        }
        let mut written = Vec::with_capacity(files.len());
        for (path, text) in files {
            fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Round to `digits` significant digits.
pub fn sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap()
}

/// `%.{digits}g`-style formatting: shortest of fixed and scientific notation,
/// trailing zeros removed.
pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

pub(crate) fn summary_lines(lines: &[String]) -> String {
    let mut out = String::new();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out
}
