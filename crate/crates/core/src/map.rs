//! The process map `f(A) = A + g·sin(A)` and its derivatives.
//!
//! Everything here is a pure function of value inputs. Iteration is
//! sequential (no closed forms exist); an orbit is declared escaped once
//! `|A|` exceeds the configured bound.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default escape bound on `|A|`.
pub const DEFAULT_ESCAPE_BOUND: f64 = 1e12;

/// Coupling constant plus the escape bound used when iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub g: f64,
    pub escape_bound: f64,
}

impl MapParams {
    pub fn new(g: f64) -> Self {
        Self {
            g,
            escape_bound: DEFAULT_ESCAPE_BOUND,
        }
    }

    pub fn with_escape_bound(mut self, bound: f64) -> Self {
        self.escape_bound = bound;
        self
    }
}

/// The two critical points of `f` inside one period of the sine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    /// `acos(-1/g)`, in `(π/2, π)`.
    pub a1: f64,
    /// `2π - a1`.
    pub a2: f64,
}

/// Selects one of the two critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalBranch {
    A1,
    A2,
}

impl CriticalPair {
    pub fn get(&self, which: CriticalBranch) -> f64 {
        match which {
            CriticalBranch::A1 => self.a1,
            CriticalBranch::A2 => self.a2,
        }
    }
}

/// An iteration left the region `|A| <= escape_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Escaped {
    /// Number of map applications after which the bound was exceeded (1-based).
    pub step: usize,
    /// The offending value.
    pub value: f64,
}

#[inline]
pub fn eval(p: &MapParams, a: f64) -> f64 {
    a + p.g * a.sin()
}

#[inline]
pub fn deriv(p: &MapParams, a: f64) -> f64 {
    1.0 + p.g * a.cos()
}

/// n-fold composition of `f`. `n = 0` returns `a` unchanged.
pub fn iterate_n(p: &MapParams, a: f64, n: usize) -> std::result::Result<f64, Escaped> {
    let mut x = a;
    for step in 1..=n {
        x = eval(p, x);
        if !(x.abs() <= p.escape_bound) {
            return Err(Escaped { step, value: x });
        }
    }
    Ok(x)
}

/// Composition without escape checks, for short fixed-length compositions
/// such as `fⁿ(A) - A` during root finding.
#[inline]
pub fn compose(p: &MapParams, a: f64, n: usize) -> f64 {
    (0..n).fold(a, |x, _| eval(p, x))
}

/// Chain-rule derivative of `fⁿ` along the precomputed orbit `A₀..A_{n-1}`.
///
/// Only the first `n` points are used.
pub fn multiplier_n(p: &MapParams, orbit_points: &[f64], n: usize) -> f64 {
    debug_assert!(orbit_points.len() >= n);
    orbit_points[..n].iter().map(|&a| deriv(p, a)).product()
}

/// Multiplier of `fⁿ` at `a`, generating the orbit internally.
pub fn multiplier_at(p: &MapParams, a: f64, n: usize) -> f64 {
    let mut pts = Vec::with_capacity(n);
    let mut x = a;
    for _ in 0..n {
        pts.push(x);
        x = eval(p, x);
    }
    multiplier_n(p, &pts, n)
}

pub fn critical_points(p: &MapParams) -> Result<CriticalPair> {
    // acos(-1/g) degenerates to π at g = 1
    if !(p.g > 1.0) || !p.g.is_finite() {
        return Err(Error::Domain { g: p.g });
    }
    let a1 = (-1.0 / p.g).acos();
    Ok(CriticalPair { a1, a2: TAU - a1 })
}

/// `a mod 2π` with the result in `[0, 2π)`, including for negative `a`.
pub fn mod_2pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two phases on the circle of circumference 2π.
pub fn circular_distance(x: f64, y: f64) -> f64 {
    let d = mod_2pi(x - y);
    d.min(TAU - d)
}

/// `k·π` for integer `k`; fixed points of every iterate.
pub fn multiple_of_pi(k: i64) -> f64 {
    k as f64 * PI
}
