//! Closed-form and bisection solvers for bifurcation thresholds in g.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, MapParams};
use crate::roots;

/// Residual bound every returned threshold satisfies.
pub const SOLVER_TOL: f64 = 1e-12;

/// Bracket in g for the bios-onset equation.
pub const BIOS_BRACKET: (f64, f64) = (4.0, 5.0);

/// Default g bracket for the L-step condition: from bios onset to the
/// first ballistic window.
pub const LSTEP_G_BRACKET: (f64, f64) = (4.6, TAU);

/// Default bracket for the phase `A_k` when g is held fixed: the half
/// lobe `[π/2, π)` that contains the critical point `acos(-1/g)` for
/// every `g > 1`. The full `(0, π)` range holds further roots.
pub const LSTEP_PHASE_BRACKET: (f64, f64) = (FRAC_PI_2, PI);

const SCAN_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThresholdKind {
    BiosOnset,
    /// Drift of `2kπ` per step.
    BallisticOnset(u32),
    /// `f^L(A_k) - A_k = 2π`.
    LStepOnset(usize),
}

impl std::fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdKind::BiosOnset => write!(f, "bios-onset"),
            ThresholdKind::BallisticOnset(k) => write!(f, "ballistic-onset({k})"),
            ThresholdKind::LStepOnset(l) => write!(f, "lstep-onset({l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub g: f64,
    pub residual: f64,
    /// The phase at which the defining condition holds.
    pub aux: Option<f64>,
    pub kind: ThresholdKind,
}

/// `A*(g) + g·sin(A*(g)) - 2π` with `A* = acos(-1/g)`: the image of the
/// critical point reaches the next period of the sine.
pub fn bios_equation(g: f64) -> f64 {
    let a = (-1.0 / g).acos();
    a + g * a.sin() - TAU
}

pub fn solve_bios_onset() -> ThresholdResult {
    let (lo, hi) = BIOS_BRACKET;
    let root = roots::bisect(bios_equation, lo, hi, 0.0)
        .expect("bios equation changes sign on its fixed bracket");
    ThresholdResult {
        g: root.x,
        residual: root.residual,
        aux: Some((-1.0 / root.x).acos()),
        kind: ThresholdKind::BiosOnset,
    }
}

/// Smallest g with `g·sin(A_k) = 2kπ`, attained at `A_k = π/2`.
pub fn ballistic_onset(k: u32) -> Result<ThresholdResult> {
    if k < 1 {
        return Err(Error::InvalidSettings(
            "ballistic multiple k must be >= 1".into(),
        ));
    }
    let g = 2.0 * k as f64 * PI;
    Ok(ThresholdResult {
        g,
        residual: g * FRAC_PI_2.sin() - 2.0 * k as f64 * PI,
        aux: Some(FRAC_PI_2),
        kind: ThresholdKind::BallisticOnset(k),
    })
}

/// `f^L(a_k) - a_k - 2π` at gain `g`, i.e. `Σ_j g·sin(f^j(a_k)) - 2π`.
pub fn lstep_equation(l: usize, g: f64, a_k: f64) -> f64 {
    map::compose(&MapParams::new(g), a_k, l) - a_k - TAU
}

fn check_stride(l: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidSettings(format!(
            "L-step stride must be >= 2 (got {l})"
        )));
    }
    Ok(())
}

/// Smallest g in the default bracket solving the L-step condition at `a_k`.
pub fn solve_lstep(l: usize, a_k: f64) -> Result<ThresholdResult> {
    solve_lstep_in(l, a_k, LSTEP_G_BRACKET)
}

pub fn solve_lstep_in(l: usize, a_k: f64, g_bracket: (f64, f64)) -> Result<ThresholdResult> {
    check_stride(l)?;
    let (lo, hi) = g_bracket;
    let root = roots::first_root(|g| lstep_equation(l, g, a_k), lo, hi, SCAN_CELLS, 0.0)
        .ok_or_else(|| Error::NoRoot {
            lo,
            hi,
            what: format!("L = {l} condition at A_k = {a_k}"),
        })?;
    Ok(ThresholdResult {
        g: root.x,
        residual: root.residual,
        aux: Some(a_k),
        kind: ThresholdKind::LStepOnset(l),
    })
}

/// Smallest phase `A_k` in [`LSTEP_PHASE_BRACKET`] solving the L-step condition at fixed `g`.
pub fn solve_lstep_phase(l: usize, g: f64) -> Result<ThresholdResult> {
    solve_lstep_phase_in(l, g, LSTEP_PHASE_BRACKET)
}

pub fn solve_lstep_phase_in(l: usize, g: f64, a_bracket: (f64, f64)) -> Result<ThresholdResult> {
    check_stride(l)?;
    let (lo, hi) = a_bracket;
    let root = roots::first_root(|a| lstep_equation(l, g, a), lo, hi, SCAN_CELLS, 0.0).ok_or_else(
        || Error::NoRoot {
            lo,
            hi,
            what: format!("L = {l} condition at g = {g}"),
        },
    )?;
    Ok(ThresholdResult {
        g,
        residual: root.residual,
        aux: Some(root.x),
        kind: ThresholdKind::LStepOnset(l),
    })
}

/// Every phase root of the L-step condition at fixed `g` on `a_bracket`,
/// in increasing order.
pub fn lstep_phase_roots(l: usize, g: f64, a_bracket: (f64, f64)) -> Result<Vec<ThresholdResult>> {
    check_stride(l)?;
    let (lo, hi) = a_bracket;
    let f = |a: f64| lstep_equation(l, g, a);
    let step = (hi - lo) / SCAN_CELLS as f64;
    let mut out = Vec::new();
    for i in 0..SCAN_CELLS {
        let a0 = lo + step * i as f64;
        let a1 = if i + 1 == SCAN_CELLS { hi } else { a0 + step };
        let (f0, f1) = (f(a0), f(a1));
        if f0 == 0.0 || (f0.signum() != f1.signum() && f1 != 0.0) {
            let root = roots::bisect(f, a0, a1, 0.0)?;
            out.push(ThresholdResult {
                g,
                residual: root.residual,
                aux: Some(root.x),
                kind: ThresholdKind::LStepOnset(l),
            });
        }
    }
    Ok(out)
}

/// Trace the L-step solution curve: the smallest g for each phase in
/// `a_grid`. Phases without a root are skipped; results whose g repeats
/// an earlier one (within 1e-12 relative) are dropped.
pub fn scan_lstep_solutions(
    l: usize,
    a_grid: &[f64],
    g_bracket: (f64, f64),
) -> Result<Vec<ThresholdResult>> {
    check_stride(l)?;
    if a_grid.is_empty() {
        return Err(Error::InvalidSettings("phase grid is empty".into()));
    }
    let found: Vec<ThresholdResult> = a_grid
        .par_iter()
        .filter_map(|&a| solve_lstep_in(l, a, g_bracket).ok())
        .collect();
    let mut out: Vec<ThresholdResult> = Vec::with_capacity(found.len());
    for r in found {
        if !out.iter().any(|q| (q.g - r.g).abs() <= 1e-12 * r.g.abs()) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Re-evaluate the defining equation of `r` at its own `(g, aux)`.
pub fn recheck(r: &ThresholdResult) -> f64 {
    match r.kind {
        ThresholdKind::BiosOnset => bios_equation(r.g),
        ThresholdKind::BallisticOnset(k) => {
            r.g * r.aux.unwrap_or(FRAC_PI_2).sin() - 2.0 * k as f64 * PI
        }
        ThresholdKind::LStepOnset(l) => lstep_equation(l, r.g, r.aux.unwrap_or(f64::NAN)),
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn bios_bracket_changes_sign() {
        assert!(bios_equation(4.0) < 0.0);
        assert!(bios_equation(5.0) > 0.0);
    }

    #[test]
    fn bios_onset_value() {
        let r = solve_bios_onset();
        assert!((r.g - 4.603_338_848_751_700_352_556_582_029_103).abs() < 1e-10);
        assert!(r.residual.abs() < SOLVER_TOL);
        let a = r.aux.unwrap();
        assert!((a + r.g * a.sin() - TAU).abs() < 1e-12);
    }

    #[test]
    fn ballistic_onsets() {
        let r = ballistic_onset(1).unwrap();
        assert_eq!(r.g, TAU);
        assert_eq!(r.aux, Some(FRAC_PI_2));
        assert_eq!(ballistic_onset(2).unwrap().g, 4.0 * PI);
        assert!(ballistic_onset(0).is_err());
    }

    #[test]
    fn ballistic_orbit_advances_by_2k_pi() {
        for k in 1..=3u32 {
            let r = ballistic_onset(k).unwrap();
            let p = MapParams::new(r.g);
            let mut x = FRAC_PI_2;
            for _ in 0..500 {
                let y = map::eval(&p, x);
                assert!((y - x - 2.0 * k as f64 * PI).abs() < 1e-9);
                x = y;
            }
        }
    }

    #[test]
    fn lstep_at_1_73_hits_reported_gain() {
        let r = solve_lstep(2, 1.73).unwrap();
        assert!(
            (r.g - 4.911_529_662_464_309_878_494_343_949_810_3).abs() < 1e-10,
            "{}",
            r.g
        );
        assert!(r.residual.abs() < SOLVER_TOL);
    }

    #[test]
    fn lstep_phase_at_reported_gain() {
        let r = solve_lstep_phase(2, 4.911_529_662_464_309_878_494_343_949_810_3).unwrap();
        let a = r.aux.unwrap();
        assert!((a - 1.73).abs() < 0.01, "{a}");
        assert!(r.residual.abs() < SOLVER_TOL);
    }

    #[test]
    fn lstep_phase_roots_on_full_lobe() {
        let g = 4.911_529_662_464_309_878_494_343_949_810_3;
        let all = lstep_phase_roots(2, g, (0.0, PI)).unwrap();
        let phases: Vec<f64> = all.iter().map(|r| r.aux.unwrap()).collect();
        // two entry/exit pairs; the second pair opens at the reported phase
        assert_eq!(phases.len(), 4, "{phases:?}");
        assert!(phases[0] < 0.31 && phases[1] < 0.31);
        assert!((phases[2] - 1.73).abs() < 1e-4);
        assert!(all.iter().all(|r| r.residual.abs() < SOLVER_TOL));
    }

    #[test]
    fn lstep_at_pi_has_no_root() {
        assert!(matches!(solve_lstep(2, PI), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn lstep_rejects_short_stride() {
        assert!(solve_lstep(1, 1.0).is_err());
    }

    #[test]
    fn lstep_result_is_mod_2pi_periodic() {
        for l in [2, 3] {
            let r = solve_lstep(l, 1.8).unwrap();
            let p = MapParams::new(r.g);
            let a = r.aux.unwrap();
            let end = map::compose(&p, a, l);
            assert!(map::circular_distance(end, a) < 1e-9);
        }
    }

    #[test]
    fn scan_excludes_ballistic_point_at_pi_over_two() {
        let r = scan_lstep_solutions(2, &[FRAC_PI_2], (6.0, 6.6)).unwrap();
        assert!(r.iter().all(|t| (t.g - TAU).abs() > 1e-6));
        // f²(π/2) - π/2 = 4π at g = 2π, not 2π
        assert!((lstep_equation(2, TAU, FRAC_PI_2) - TAU).abs() < 1e-9);
    }

    #[test]
    fn scan_rejects_empty_grid() {
        assert!(scan_lstep_solutions(2, &[], LSTEP_G_BRACKET).is_err());
    }
}
