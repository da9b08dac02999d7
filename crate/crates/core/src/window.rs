//! Periodic-window detection from iterated critical points, and Q-curves.
//!
//! A window of type `(L, I)` is a g-range where the critical orbit,
//! sampled every `L` steps, alternates between beyond `(2I+1)π` (odd
//! samples) and below `π` (even samples) for the first `n_max` samples.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, CriticalBranch, MapParams};
use crate::roots;
use crate::stability::linspace;

/// Predicate grid density, points per unit of g.
pub const GRID_PER_UNIT_G: f64 = 20_000.0;

/// Bisection tolerance on window boundaries.
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowPredicateSpec {
    /// Steps between checked samples (`L`).
    pub stride: usize,
    /// Odd samples must exceed `(2I + 1)π`.
    pub half_period: u32,
    /// Number of samples checked.
    pub n_max: usize,
    pub critical: CriticalBranch,
}

impl WindowPredicateSpec {
    pub fn new(stride: usize, half_period: u32, n_max: usize) -> Self {
        Self {
            stride,
            half_period,
            n_max,
            critical: CriticalBranch::A1,
        }
    }

    pub fn with_critical(mut self, critical: CriticalBranch) -> Self {
        self.critical = critical;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride < 1 || self.half_period < 1 || self.n_max < 1 {
            return Err(Error::InvalidSettings(format!(
                "window spec needs L, I, n_max >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    fn upper_level(&self) -> f64 {
        (2 * self.half_period + 1) as f64 * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowInterval {
    pub g_lo: f64,
    pub g_hi: f64,
    pub spec: WindowPredicateSpec,
    /// `n_max` used for the boundaries.
    pub refinement_n: usize,
    /// Boundaries are grid nodes rather than bisected transitions.
    pub coarse: bool,
    /// The run touched the scan range, so at least one end is the scan edge.
    pub truncated: bool,
}

impl WindowInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.g_lo + self.g_hi)
    }

    pub fn contains(&self, other: &WindowInterval, slack: f64) -> bool {
        self.g_lo <= other.g_lo + slack && other.g_hi <= self.g_hi + slack
    }
}

/// Values `f^{L·n}(A*)` for `n = 1..=n_max`.
pub fn critical_trace(g: f64, spec: &WindowPredicateSpec) -> Result<Vec<f64>> {
    let p = MapParams::new(g);
    let mut x = map::critical_points(&p)?.get(spec.critical);
    Ok((0..spec.n_max)
        .map(|_| {
            x = map::compose(&p, x, spec.stride);
            x
        })
        .collect())
}

/// True iff every sample `f^{L·n}(A*)`, `n = 1..=n_max`, lies above
/// `(2I+1)π` for odd `n` and below `π` for even `n`. False for `g <= 1`.
pub fn window_predicate(p: &MapParams, spec: &WindowPredicateSpec) -> bool {
    let Ok(cp) = map::critical_points(p) else {
        return false;
    };
    let upper = spec.upper_level();
    let mut x = cp.get(spec.critical);
    for n in 1..=spec.n_max {
        x = map::compose(p, x, spec.stride);
        let ok = if n % 2 == 1 { x > upper } else { x < PI };
        if !ok {
            return false;
        }
    }
    true
}

/// Grid size giving [`GRID_PER_UNIT_G`] points per unit of g.
pub fn default_grid(g_lo: f64, g_hi: f64) -> usize {
    ((g_hi - g_lo) * GRID_PER_UNIT_G).ceil().max(1.0) as usize + 1
}

/// Maximal g-intervals of `[g_lo, g_hi]` on which the predicate holds.
pub fn find_windows(
    spec: &WindowPredicateSpec,
    g_lo: f64,
    g_hi: f64,
    grid: usize,
) -> Result<Vec<WindowInterval>> {
    spec.validate()?;
    if !(g_lo > 1.0) || !(g_lo < g_hi) || grid < 2 {
        return Err(Error::InvalidSettings(format!(
            "window scan needs 1 < g_lo < g_hi and grid >= 2 (got [{g_lo}, {g_hi}], grid {grid})"
        )));
    }
    let pred = |g: f64| window_predicate(&MapParams::new(g), spec);
    let nodes = linspace(g_lo, g_hi, grid);
    let hits: Vec<bool> = nodes.par_iter().map(|&g| pred(g)).collect();

    let mut runs = Vec::new();
    let mut i = 0;
    while i < grid {
        if !hits[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid && hits[i + 1] {
            i += 1;
        }
        runs.push((start, i));
        i += 1;
    }

    runs.into_iter()
        .map(|(s, e)| {
            let lo = if s == 0 {
                nodes[0]
            } else {
                roots::bisect_transition(pred, nodes[s], nodes[s - 1], BOUNDARY_TOL)?.0
            };
            let hi = if e == grid - 1 {
                nodes[grid - 1]
            } else {
                roots::bisect_transition(pred, nodes[e], nodes[e + 1], BOUNDARY_TOL)?.0
            };
            Ok(WindowInterval {
                g_lo: lo,
                g_hi: hi,
                spec: *spec,
                refinement_n: spec.n_max,
                coarse: false,
                truncated: s == 0 || e == grid - 1,
            })
        })
        .collect()
}

/// Shadow curve `g ↦ fⁿ(A*) mod 2π` over a grid of g.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCurve {
    pub n: usize,
    pub which: CriticalBranch,
    pub g_grid: Vec<f64>,
    pub points: Vec<f64>,
}

/// `fⁿ(A*)` before reduction.
pub fn critical_image(g: f64, which: CriticalBranch, n: usize) -> Result<f64> {
    let p = MapParams::new(g);
    let a = map::critical_points(&p)?.get(which);
    Ok(map::compose(&p, a, n))
}

pub fn q_curve(n: usize, which: CriticalBranch, g_grid: &[f64]) -> Result<QCurve> {
    let points = g_grid
        .par_iter()
        .map(|&g| critical_image(g, which, n).map(map::mod_2pi))
        .collect::<Result<Vec<_>>>()?;
    Ok(QCurve {
        n,
        which,
        g_grid: g_grid.to_vec(),
        points,
    })
}
