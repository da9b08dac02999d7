//! Parameter sweeps over g and their tabular serialization.
//!
//! Rows are produced in grid order (initial condition, then g index,
//! then sample index) regardless of how many worker threads run, so a
//! fixed configuration always emits the same bytes.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::MapParams;
use crate::orbit::{self, BehaviorKind, ClassifyTolerances, OrbitSettings, OrbitStatus};
use crate::stability::linspace;

pub const CSV_HEADER: [&str; 7] = [
    "g",
    "ic",
    "sample_index",
    "value",
    "status",
    "label",
    "seed",
];

/// How initial conditions are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IcPolicy {
    Fixed(f64),
    /// Uniform on `[0, 2π)`, drawn independently for every g from `seed`.
    RandomPerG(u64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    Raw,
    Mod2Pi,
    SignedLog,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Raw => x,
            Transform::Mod2Pi => crate::map::mod_2pi(x),
            Transform::SignedLog => {
                if x == 0.0 {
                    0.0
                } else {
                    orbit::signed_log10(x)
                }
            }
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Raw => "raw",
            Transform::Mod2Pi => "mod2pi",
            Transform::SignedLog => "signed-log",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Transform::Raw),
            "mod2pi" | "mod-2pi" | "mod" => Ok(Transform::Mod2Pi),
            "signed-log" | "signedlog" | "log" => Ok(Transform::SignedLog),
            _ => Err(Error::Parse(format!(
                "unknown transform `{s}` (expected raw, mod2pi, signed-log)"
            ))),
        }
    }
}

/// One sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub g_lo: f64,
    pub g_hi: f64,
    pub g_steps: usize,
    pub ic: IcPolicy,
    pub orbit: OrbitSettings,
    pub transform: Transform,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.g_steps < 1 {
            return Err(Error::InvalidSettings("g_steps must be >= 1".into()));
        }
        if !(self.g_lo <= self.g_hi) {
            return Err(Error::InvalidSettings(format!(
                "need g_lo <= g_hi (got {}, {})",
                self.g_lo, self.g_hi
            )));
        }
        if let IcPolicy::List(v) = &self.ic {
            if v.is_empty() {
                return Err(Error::InvalidSettings(
                    "initial-condition list is empty".into(),
                ));
            }
        }
        self.orbit.validate()
    }

    pub fn g_values(&self) -> Vec<f64> {
        linspace(self.g_lo, self.g_hi, self.g_steps)
    }

    /// Seed reported with every row.
    pub fn seed(&self) -> u64 {
        match self.ic {
            IcPolicy::RandomPerG(seed) => seed,
            _ => self.orbit.seed,
        }
    }
}

/// Initial condition for grid index `i` under a random policy.
pub fn random_ic(seed: u64, g_index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(g_index as u64);
    rng.gen_range(0.0..TAU)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Ok,
    Escaped { step: usize },
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Escaped { step } => write!(f, "escaped@{step}"),
        }
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ok" {
            return Ok(RowStatus::Ok);
        }
        s.strip_prefix("escaped@")
            .and_then(|k| k.parse().ok())
            .map(|step| RowStatus::Escaped { step })
            .ok_or_else(|| Error::Parse(format!("bad status `{s}`")))
    }
}

/// One emitted sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub g: f64,
    pub ic: f64,
    pub sample_index: usize,
    /// Absent only for an orbit that escaped before its first sample.
    pub value: Option<f64>,
    pub status: RowStatus,
    /// `None` when the orbit was too short to classify.
    pub label: Option<BehaviorKind>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub tool_version: String,
    pub seed: u64,
    /// Effective configuration, echoed as key/value pairs.
    pub config: Vec<(String, String)>,
    /// Wall-clock stamp; kept out of the row stream so reruns stay identical.
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub grid: ScanGrid,
    pub rows: Vec<ScanRow>,
    pub metadata: ScanMetadata,
}

fn scan_one(grid: &ScanGrid, g: f64, a0: f64, seed: u64) -> Result<Vec<ScanRow>> {
    let o = orbit::run_orbit(&MapParams::new(g), a0, &grid.orbit)?;
    let label = orbit::classify(&o, &ClassifyTolerances::default())
        .ok()
        .map(|l| l.kind);
    let status = match o.status {
        OrbitStatus::Completed => RowStatus::Ok,
        OrbitStatus::Escaped { step } => RowStatus::Escaped { step },
    };
    if o.raw.is_empty() {
        return Ok(vec![ScanRow {
            g,
            ic: a0,
            sample_index: 0,
            value: None,
            status,
            label,
            seed,
        }]);
    }
    Ok(o.raw
        .iter()
        .enumerate()
        .map(|(i, &x)| ScanRow {
            g,
            ic: a0,
            sample_index: i,
            value: Some(grid.transform.apply(x)),
            status,
            label,
            seed,
        })
        .collect())
}

/// Run one orbit per (initial condition, g) and record transformed samples
/// with the orbit's behaviour label. Escapes are recorded, never fatal.
pub fn bifurcation_scan(grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    let gs = grid.g_values();
    let seed = grid.seed();
    let tasks: Vec<(f64, f64)> = match &grid.ic {
        IcPolicy::Fixed(a0) => gs.iter().map(|&g| (g, *a0)).collect(),
        IcPolicy::RandomPerG(s) => gs
            .iter()
            .enumerate()
            .map(|(i, &g)| (g, random_ic(*s, i)))
            .collect(),
        IcPolicy::List(ics) => ics
            .iter()
            .flat_map(|&a0| gs.iter().map(move |&g| (g, a0)))
            .collect(),
    };
    let chunks = tasks
        .par_iter()
        .map(|&(g, a0)| scan_one(grid, g, a0, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        grid: grid.clone(),
        rows: chunks.into_iter().flatten().collect(),
        metadata: ScanMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: Vec::new(),
            created_unix: None,
        },
    })
}

/// One sub-scan per listed initial condition, for overlaying attractors.
pub fn multistability_scan(grid: &ScanGrid) -> Result<ScanResult> {
    match &grid.ic {
        IcPolicy::List(v) if v.len() >= 2 => bifurcation_scan(grid),
        _ => Err(Error::InvalidSettings(
            "multistability scan needs a list of at least two initial conditions".into(),
        )),
    }
}

impl ScanResult {
    /// Rows belonging to one initial condition.
    pub fn rows_for_ic(&self, ic: f64) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(move |r| r.ic == ic)
    }
}

/// Shortest representation that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn label_text(label: Option<BehaviorKind>) -> String {
    label.map_or_else(|| "unclassified".to_string(), |k| k.to_string())
}

pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.g),
            fmt_f64(r.ic),
            r.sample_index.to_string(),
            r.value.map(fmt_f64).unwrap_or_default(),
            r.status.to_string(),
            label_text(r.label),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    g: f64,
    ic: f64,
    sample_index: usize,
    value: Option<f64>,
    status: String,
    label: String,
    seed: u64,
}

pub fn write_ndjson<W: Write>(rows: &[ScanRow], mut out: W) -> Result<()> {
    for r in rows {
        let j = JsonRow {
            g: r.g,
            ic: r.ic,
            sample_index: r.sample_index,
            value: r.value,
            status: r.status.to_string(),
            label: label_text(r.label),
            seed: r.seed,
        };
        let line = serde_json::to_string(&j).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_label(s: &str) -> Result<Option<BehaviorKind>> {
    if s == "unclassified" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ScanRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            Ok(ScanRow {
                g: parse_f64(field(0))?,
                ic: parse_f64(field(1))?,
                sample_index: field(2)
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index `{}`", field(2))))?,
                value: match field(3) {
                    "" => None,
                    v => Some(parse_f64(v)?),
                },
                status: field(4).parse()?,
                label: parse_label(field(5))?,
                seed: field(6)
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad seed `{}`", field(6))))?,
            })
        })
        .collect()
}

pub fn read_ndjson<R: BufRead>(input: R) -> Result<Vec<ScanRow>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|line| {
            let j: JsonRow =
                serde_json::from_str(&line?).map_err(|e| Error::Parse(e.to_string()))?;
            Ok(ScanRow {
                g: j.g,
                ic: j.ic,
                sample_index: j.sample_index,
                value: j.value,
                status: j.status.parse()?,
                label: parse_label(&j.label)?,
                seed: j.seed,
            })
        })
        .collect()
}

/// `key=value` lines describing a scan, written next to its CSV.
pub fn write_metadata<W: Write>(meta: &ScanMetadata, mut out: W) -> Result<()> {
    writeln!(out, "tool_version={}", meta.tool_version)?;
    writeln!(out, "seed={}", meta.seed)?;
    if let Some(t) = meta.created_unix {
        writeln!(out, "created_unix={t}")?;
    }
    for (k, v) in &meta.config {
        writeln!(out, "config.{k}={v}")?;
    }
    Ok(())
}
