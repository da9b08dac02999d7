//! Orbit generation, display transforms and behaviour classification.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, circular_distance, MapParams, DEFAULT_ESCAPE_BOUND};

/// Transient/sample counts and escape bound for one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSettings {
    pub transient: usize,
    pub samples: usize,
    pub escape_bound: f64,
    /// Seed for random initial conditions; carried so it can be surfaced in outputs.
    pub seed: u64,
}

impl Default for OrbitSettings {
    fn default() -> Self {
        Self {
            transient: 5000,
            samples: 4096,
            escape_bound: DEFAULT_ESCAPE_BOUND,
            seed: 0,
        }
    }
}

impl OrbitSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::InvalidSettings("samples must be >= 1".into()));
        }
        if !(self.escape_bound > 0.0) {
            return Err(Error::InvalidSettings("escape_bound must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitStatus {
    Completed,
    /// `step` counts map applications from `a0`, transient included.
    Escaped {
        step: usize,
    },
}

/// A recorded trajectory after transient removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub params: MapParams,
    pub a0: f64,
    pub raw: Vec<f64>,
    pub status: OrbitStatus,
}

impl OrbitRecord {
    pub fn escaped(&self) -> bool {
        matches!(self.status, OrbitStatus::Escaped { .. })
    }
}

/// Iterate from `a0`, discard `transient` values, record `samples` values.
///
/// `raw[i]` is the `(transient + i + 1)`-th iterate. On escape the record
/// is truncated before the offending value.
pub fn run_orbit(p: &MapParams, a0: f64, s: &OrbitSettings) -> Result<OrbitRecord> {
    s.validate()?;
    let params = p.with_escape_bound(s.escape_bound);
    let mut raw = Vec::with_capacity(s.samples);
    let mut x = a0;
    let total = s.transient + s.samples;
    let mut status = OrbitStatus::Completed;
    for step in 1..=total {
        x = map::eval(&params, x);
        if !(x.abs() <= s.escape_bound) {
            status = OrbitStatus::Escaped { step };
            break;
        }
        if step > s.transient {
            raw.push(x);
        }
    }
    Ok(OrbitRecord {
        params,
        a0,
        raw,
        status,
    })
}

pub fn mod_reduce(o: &OrbitRecord) -> Vec<f64> {
    o.raw.iter().map(|&a| map::mod_2pi(a)).collect()
}

/// `sign(x)·log10(1 + |x|)`; defined through zero and for both signs.
pub fn signed_log10(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p() / std::f64::consts::LN_10
}

pub fn signed_log(o: &OrbitRecord) -> Vec<f64> {
    o.raw
        .iter()
        .map(|&a| if a == 0.0 { 0.0 } else { signed_log10(a) })
        .collect()
}

/// Staircase between the graph of `f` and the diagonal.
///
/// Starts at `(a0, a0)` and appends `(A_t, A_{t+1})`, `(A_{t+1}, A_{t+1})`
/// per step, giving `2·steps + 1` points unless the orbit escapes.
pub fn cobweb_trace(p: &MapParams, a0: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(2 * steps + 1);
    pts.push((a0, a0));
    let mut x = a0;
    for _ in 0..steps {
        let y = map::eval(p, x);
        if !(y.abs() <= p.escape_bound) {
            break;
        }
        pts.push((x, y));
        pts.push((y, y));
        x = y;
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Direction::Positive
        } else {
            Direction::Negative
        }
    }

    fn symbol(self) -> char {
        match self {
            Direction::Positive => '+',
            Direction::Negative => '-',
        }
    }
}

/// Behaviour taxonomy of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorKind {
    ConvergedFixedPoint,
    BoundedPeriodic(usize),
    BoundedChaotic,
    Biotic,
    /// Mod-2π periodic with period `p` while the raw state drifts by a
    /// fixed non-zero multiple of 2π every `p` steps.
    PeriodicDivergent(usize, Direction),
    ChaoticDivergent(Direction),
}

impl BehaviorKind {
    pub fn period(&self) -> Option<usize> {
        match *self {
            BehaviorKind::BoundedPeriodic(p) | BehaviorKind::PeriodicDivergent(p, _) => Some(p),
            BehaviorKind::ConvergedFixedPoint => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BehaviorKind::ConvergedFixedPoint => write!(f, "converged-fixed-point"),
            BehaviorKind::BoundedPeriodic(p) => write!(f, "bounded-periodic({p})"),
            BehaviorKind::BoundedChaotic => write!(f, "bounded-chaotic"),
            BehaviorKind::Biotic => write!(f, "biotic"),
            BehaviorKind::PeriodicDivergent(p, d) => {
                write!(f, "periodic-divergent({p},{})", d.symbol())
            }
            BehaviorKind::ChaoticDivergent(d) => write!(f, "chaotic-divergent({})", d.symbol()),
        }
    }
}

impl FromStr for BehaviorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown behaviour label `{s}`"));
        let (head, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(bad()),
            None => (s, None),
        };
        let dir = |t: &str| match t.trim() {
            "+" => Ok(Direction::Positive),
            "-" => Ok(Direction::Negative),
            _ => Err(bad()),
        };
        let period = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match (head, args) {
            ("converged-fixed-point", None) => Ok(BehaviorKind::ConvergedFixedPoint),
            ("bounded-chaotic", None) => Ok(BehaviorKind::BoundedChaotic),
            ("biotic", None) => Ok(BehaviorKind::Biotic),
            ("bounded-periodic", Some(a)) => Ok(BehaviorKind::BoundedPeriodic(period(a)?)),
            ("chaotic-divergent", Some(a)) => Ok(BehaviorKind::ChaoticDivergent(dir(a)?)),
            ("periodic-divergent", Some(a)) => {
                let (p, d) = a.split_once(',').ok_or_else(bad)?;
                Ok(BehaviorKind::PeriodicDivergent(period(p)?, dir(d)?))
            }
            _ => Err(bad()),
        }
    }
}

/// Diagnostic scalars behind a label.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    /// Largest `|A_{t+1} - A_t|` over the trailing fixed-point window.
    pub final_step: f64,
    /// Detected period of the mod-2π sequence, if any.
    pub period: Option<usize>,
    /// Worst raw-sequence deviation from `A_{t+p} - A_t = 2πm` at the detected period.
    pub periodicity_residual: Option<f64>,
    /// The integer `m` above.
    pub winding: Option<i64>,
    /// Mean increment per step over the recorded samples.
    pub drift_rate: f64,
    /// Fraction of increments whose sign matches the drift.
    pub step_sign_consistency: f64,
    /// `max(raw) - min(raw)`.
    pub range: f64,
    /// Set when the orbit fits no rule cleanly and the label is a fallback.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorLabel {
    pub kind: BehaviorKind,
    pub evidence: Evidence,
}

/// Thresholds for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    pub eps_fix: f64,
    pub fix_window: usize,
    pub eps_per: f64,
    pub max_period: usize,
    /// Minimum `|drift|` per step for ballistic divergence.
    pub ballistic_drift: f64,
    pub sign_consistency: f64,
    /// Slack on the 2π range separating bounded chaos from bios.
    pub range_eps: f64,
    /// Biotic orbits must have `|drift| < drift_tol`.
    pub drift_tol: f64,
    pub min_samples: usize,
    pub min_escaped_samples: usize,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            eps_fix: 1e-8,
            fix_window: 32,
            eps_per: 1e-6,
            max_period: 64,
            ballistic_drift: FRAC_PI_2,
            sign_consistency: 0.95,
            range_eps: 1e-9,
            drift_tol: FRAC_PI_2,
            min_samples: 256,
            min_escaped_samples: 64,
        }
    }
}

/// Label a recorded orbit.
///
/// Rules are tried in order: trailing increments below `eps_fix`
/// (fixed point); smallest mod-2π period over the second half of the
/// record (bounded when the raw sequence also repeats, divergent when it
/// advances by a constant non-zero multiple of 2π); consistent ballistic
/// drift (chaotic divergence); finally the raw range decides between
/// bounded chaos (≤ 2π) and bios.
pub fn classify(o: &OrbitRecord, tol: &ClassifyTolerances) -> Result<BehaviorLabel> {
    let a = &o.raw;
    let n = a.len();
    let need = if o.escaped() {
        tol.min_escaped_samples
    } else {
        tol.min_samples
    };
    if n < need.max(2) {
        return Err(Error::InsufficientSamples { got: n, need });
    }

    let steps = n - 1;
    let drift = (a[n - 1] - a[0]) / steps as f64;
    let drift_dir = drift.signum();
    let consistent = a
        .windows(2)
        .filter(|w| (w[1] - w[0]).signum() == drift_dir && w[1] != w[0])
        .count();
    let (lo, hi) = a
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let final_step = a[n.saturating_sub(tol.fix_window + 1)..]
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);

    let mut evidence = Evidence {
        final_step,
        drift_rate: drift,
        step_sign_consistency: consistent as f64 / steps as f64,
        range: hi - lo,
        ..Evidence::default()
    };
    let label = |kind, evidence| Ok(BehaviorLabel { kind, evidence });

    if final_step < tol.eps_fix {
        evidence.period = Some(1);
        evidence.winding = Some(0);
        return label(BehaviorKind::ConvergedFixedPoint, evidence);
    }

    if let Some((p, m, residual)) = detect_period(a, tol) {
        evidence.period = Some(p);
        evidence.winding = Some(m);
        evidence.periodicity_residual = Some(residual);
        let kind = if m == 0 {
            BehaviorKind::BoundedPeriodic(p)
        } else {
            BehaviorKind::PeriodicDivergent(p, Direction::of(m as f64))
        };
        return label(kind, evidence);
    }

    if drift.abs() > tol.ballistic_drift && evidence.step_sign_consistency > tol.sign_consistency {
        return label(
            BehaviorKind::ChaoticDivergent(Direction::of(drift)),
            evidence,
        );
    }

    if evidence.range <= TAU + tol.range_eps {
        return label(BehaviorKind::BoundedChaotic, evidence);
    }
    if drift.abs() < tol.drift_tol {
        return label(BehaviorKind::Biotic, evidence);
    }
    // strong drift without ballistic sign consistency
    evidence.inconclusive = true;
    label(
        BehaviorKind::ChaoticDivergent(Direction::of(drift)),
        evidence,
    )
}

/// Smallest `p` for which the second half of the record is mod-2π
/// periodic and the raw sequence advances by a constant `2πm`.
/// Returns `(p, m, residual)`.
fn detect_period(a: &[f64], tol: &ClassifyTolerances) -> Option<(usize, i64, f64)> {
    let n = a.len();
    let start = n / 2;
    for p in 1..=tol.max_period {
        if start + p >= n {
            break;
        }
        let mod_periodic = (start..n - p).all(|t| circular_distance(a[t + p], a[t]) < tol.eps_per);
        if !mod_periodic {
            continue;
        }
        let m = ((a[start + p] - a[start]) / TAU).round();
        let residual = (start..n - p)
            .map(|t| (a[t + p] - a[t] - m * TAU).abs())
            .fold(0.0, f64::max);
        if residual < tol.eps_per {
            return Some((p, m as i64, residual));
        }
    }
    None
}
