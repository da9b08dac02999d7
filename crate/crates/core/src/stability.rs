//! Fixed points of the n-th iterate, their stability, and sweeps over g.
//!
//! Roots of `h(A) = fⁿ(A) - A` are bracketed on a uniform grid and
//! bisected. Tangent (double) roots produce no sign change and are only
//! seen as a pair appearing or vanishing between neighbouring g values
//! of a sweep; a denser grid narrows but does not remove that blind spot.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, MapParams};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Neutral,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Neutral => "neutral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub a: f64,
    pub n: usize,
    /// `(fⁿ)'(a)` along the orbit of `a`.
    pub multiplier: f64,
    /// `fⁿ(a) - a`.
    pub residual: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySweep {
    pub n: usize,
    pub g_grid: Vec<f64>,
    /// One list per entry of `g_grid`.
    pub records: Vec<Vec<FixedPointRecord>>,
}

impl StabilitySweep {
    pub fn stable_counts(&self) -> Vec<usize> {
        self.records.iter().map(|r| count_stable(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityTolerances {
    pub root_tol: f64,
    pub dedup_tol: f64,
    pub neutral_band: f64,
    /// Bisection tolerance on g for boundary location.
    pub boundary_tol: f64,
}

impl Default for StabilityTolerances {
    fn default() -> Self {
        Self {
            root_tol: 1e-12,
            dedup_tol: 1e-8,
            neutral_band: 1e-9,
            boundary_tol: 1e-6,
        }
    }
}

/// Grid size for a scan of `[0, 2π)`: 8192 up to n = 4, doubled with
/// every further doubling of n.
pub fn default_grid(n: usize) -> usize {
    let doublings = n.max(4).next_power_of_two().trailing_zeros() - 2;
    8192usize << doublings
}

pub fn classify_multiplier(m: f64, neutral_band: f64) -> Stability {
    let am = m.abs();
    if am < 1.0 - neutral_band {
        Stability::Stable
    } else if am > 1.0 + neutral_band {
        Stability::Unstable
    } else {
        Stability::Neutral
    }
}

pub fn count_stable(records: &[FixedPointRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .count()
}

pub fn find_fixed_points(
    p: &MapParams,
    n: usize,
    interval: Range<f64>,
    grid: usize,
) -> Result<Vec<FixedPointRecord>> {
    find_fixed_points_with(p, n, interval, grid, &StabilityTolerances::default())
}

/// Roots of `fⁿ(A) - A` on `[lo, hi)`, sorted by position.
pub fn find_fixed_points_with(
    p: &MapParams,
    n: usize,
    interval: Range<f64>,
    grid: usize,
    tol: &StabilityTolerances,
) -> Result<Vec<FixedPointRecord>> {
    let Range { start: lo, end: hi } = interval;
    if n < 1 {
        return Err(Error::InvalidSettings("iterate order must be >= 1".into()));
    }
    if !(lo < hi) || grid < 2 {
        return Err(Error::InvalidSettings(format!(
            "need lo < hi and grid >= 2 (got [{lo}, {hi}), grid {grid})"
        )));
    }

    let h = |x: f64| map::compose(p, x, n) - x;
    let step = (hi - lo) / grid as f64;
    let nodes: Vec<f64> = (0..=grid)
        .map(|i| if i == grid { hi } else { lo + step * i as f64 })
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&x| h(x)).collect();

    let mut roots = Vec::new();
    for i in 0..grid {
        let (x0, h0) = (nodes[i], values[i]);
        let (x1, h1) = (nodes[i + 1], values[i + 1]);
        if h0.abs() <= tol.root_tol {
            roots.push((x0, h0));
        }
        if h0 != 0.0 && h1 != 0.0 && h0.signum() != h1.signum() {
            if let Ok(r) = roots::bisect(h, x0, x1, 0.0) {
                roots.push((r.x, r.residual));
            }
        }
    }

    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for (x, r) in roots {
        match merged.last_mut() {
            Some(last) if x - last.0 < tol.dedup_tol => {
                if r.abs() < last.1.abs() {
                    *last = (x, r);
                }
            }
            _ => merged.push((x, r)),
        }
    }

    Ok(merged
        .into_iter()
        .filter(|&(x, _)| x < hi - tol.dedup_tol)
        .map(|(a, residual)| {
            let multiplier = map::multiplier_at(p, a, n);
            FixedPointRecord {
                a,
                n,
                multiplier,
                residual,
                stability: classify_multiplier(multiplier, tol.neutral_band),
            }
        })
        .collect())
}

/// `steps` evenly spaced values on `[lo, hi]` (just `lo` when `steps == 1`).
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let d = (hi - lo) / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        hi
                    } else {
                        lo + d * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Fixed points of `fⁿ` on `interval` at each of `steps` values of g.
pub fn sweep_stability(
    n: usize,
    g_lo: f64,
    g_hi: f64,
    steps: usize,
    interval: Range<f64>,
) -> Result<StabilitySweep> {
    if !(g_lo < g_hi) && !(steps == 1 && g_lo == g_hi) {
        return Err(Error::InvalidSettings(format!(
            "need g_lo < g_hi (got {g_lo}, {g_hi})"
        )));
    }
    let g_grid = linspace(g_lo, g_hi, steps);
    let grid = default_grid(n);
    let records = g_grid
        .par_iter()
        .map(|&g| find_fixed_points(&MapParams::new(g), n, interval.clone(), grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilitySweep { n, g_grid, records })
}

/// Number of stable roots of `fⁿ` on `interval` at `g`.
pub fn stable_count(g: f64, n: usize, interval: Range<f64>) -> Result<usize> {
    let records = find_fixed_points(&MapParams::new(g), n, interval, default_grid(n))?;
    Ok(count_stable(&records))
}

/// Bisect on g for the point where the stable-root count of `fⁿ` changes.
pub fn locate_stability_boundary(
    n: usize,
    g_bracket: (f64, f64),
    interval: Range<f64>,
) -> Result<f64> {
    let tol = StabilityTolerances::default();
    let (g_lo, g_hi) = g_bracket;
    let c_lo = stable_count(g_lo, n, interval.clone())?;
    let c_hi = stable_count(g_hi, n, interval.clone())?;
    if c_lo == c_hi {
        return Err(Error::Bracket {
            lo: g_lo,
            hi: g_hi,
            reason: format!("stable-root count is {c_lo} at both ends"),
        });
    }
    let (a, b) = roots::bisect_transition(
        |g| stable_count(g, n, interval.clone()).is_ok_and(|c| c == c_lo),
        g_lo,
        g_hi,
        tol.boundary_tol,
    )?;
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn stable_positions(g: f64, n: usize) -> Vec<f64> {
        find_fixed_points(&MapParams::new(g), n, 0.0..TAU, default_grid(n))
            .unwrap()
            .into_iter()
            .filter(|r| r.stability == Stability::Stable)
            .map(|r| r.a)
            .collect()
    }

    #[test]
    fn default_grid_doubles_with_order() {
        assert_eq!(default_grid(1), 8192);
        assert_eq!(default_grid(4), 8192);
        assert_eq!(default_grid(5), 16384);
        assert_eq!(default_grid(8), 16384);
        assert_eq!(default_grid(16), 32768);
    }

    #[test]
    fn first_iterate_at_1_5() {
        let r = find_fixed_points(&MapParams::new(1.5), 1, 0.0..TAU, 4096).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].a, 0.0);
        assert_eq!(r[0].stability, Stability::Unstable);
        assert!((r[1].a - PI).abs() < 1e-12);
        assert_eq!(r[1].stability, Stability::Stable);
    }

    #[test]
    fn second_iterate_at_2_5() {
        let r = find_fixed_points(&MapParams::new(2.5), 2, 0.0..TAU, 8192).unwrap();
        assert_eq!(count_stable(&r), 2);
        let at = |x: f64| r.iter().find(|f| (f.a - x).abs() < 1e-9).unwrap();
        assert_eq!(at(0.0).stability, Stability::Unstable);
        assert_eq!(at(PI).stability, Stability::Unstable);
        for f in &r {
            assert!(f.residual.abs() < 1e-12);
        }
    }

    #[test]
    fn second_iterate_at_3_3_has_four_stable() {
        assert_eq!(stable_positions(3.3, 2).len(), 4);
    }

    #[test]
    fn period_two_multiplier_is_contracting_at_2_5() {
        let p = MapParams::new(2.5);
        let x = stable_positions(2.5, 2)[0];
        let orbit = [x, map::eval(&p, x)];
        assert!(map::multiplier_n(&p, &orbit, 2).abs() < 1.0);
    }

    #[test]
    fn symmetric_period_two_orbit_destabilises_at_pi() {
        // the symmetric cycle {x, 2π - x} solves 2x + g·sin(x) = 2π
        let cycle_multiplier = |g: f64| {
            let p = MapParams::new(g);
            let r = roots::first_root(|x| 2.0 * x + g * x.sin() - TAU, 0.1, PI - 0.1, 256, 0.0)
                .unwrap();
            assert!((map::compose(&p, r.x, 2) - r.x).abs() < 1e-12);
            let orbit = [r.x, map::eval(&p, r.x)];
            map::multiplier_n(&p, &orbit, 2)
        };
        assert!(cycle_multiplier(PI - 1e-3).abs() < 1.0);
        assert!(cycle_multiplier(PI + 1e-6).abs() > 1.0);
    }

    #[test]
    fn multiples_of_pi_are_roots_for_every_order() {
        for n in 1..=4 {
            let r = find_fixed_points(&MapParams::new(3.4), n, 0.0..TAU, default_grid(n)).unwrap();
            assert!(r.iter().any(|f| f.a == 0.0));
            assert!(r.iter().any(|f| (f.a - PI).abs() < 1e-12));
        }
    }

    #[test]
    fn sweep_rejects_empty_range() {
        assert!(sweep_stability(2, 3.0, 2.0, 5, 0.0..TAU).is_err());
        assert!(find_fixed_points(&MapParams::new(2.0), 0, 0.0..TAU, 10).is_err());
        assert!(find_fixed_points(&MapParams::new(2.0), 1, 1.0..1.0, 10).is_err());
    }

    #[test]
    fn first_iterate_single_stable_root_below_two() {
        let sweep = sweep_stability(1, 0.5, 1.9, 15, 0.0..TAU).unwrap();
        assert!(sweep.stable_counts().iter().all(|&c| c == 1));
        for recs in &sweep.records {
            let s: Vec<_> = recs
                .iter()
                .filter(|r| r.stability == Stability::Stable)
                .collect();
            assert!((s[0].a - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_requires_count_change() {
        assert!(matches!(
            locate_stability_boundary(1, (0.5, 1.5), 0.0..TAU),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn first_iterate_boundary_at_two() {
        let g = locate_stability_boundary(1, (1.5, 2.5), 0.0..TAU).unwrap();
        assert!((g - 2.0).abs() < 1e-5, "{g}");
    }
}
