//! Bracketed bisection on sign changes and on boolean transitions.
//!
//! Every solver in the crate goes through here. Newton is avoided on
//! purpose: iterates of `f` oscillate and their derivative changes sign
//! between neighbouring roots.

use crate::error::{Error, Result};

/// A located root with the residual of the function there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_BISECTIONS: usize = 200;

/// Bisect `f` on `[lo, hi]` until the bracket is narrower than `x_tol`
/// or cannot be split further in double precision.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them is zero).
/// The returned point is whichever of the final bracket ends has the
/// smaller `|f|`.
pub fn bisect<F>(f: F, lo: f64, hi: f64, x_tol: f64) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"),
        });
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(Root {
                x: mid,
                residual: 0.0,
                iterations,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    let (x, residual) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    Ok(Root {
        x,
        residual,
        iterations,
    })
}

/// Find the smallest root of `f` on `[lo, hi]` by scanning `grid` uniform
/// cells for the first sign change and bisecting it.
pub fn first_root<F>(f: F, lo: f64, hi: f64, grid: usize, x_tol: f64) -> Option<Root>
where
    F: Fn(f64) -> f64,
{
    let grid = grid.max(1);
    let step = (hi - lo) / grid as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=grid {
        let x1 = if i == grid { hi } else { lo + step * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            return Some(Root {
                x: x0,
                residual: 0.0,
                iterations: 0,
            });
        }
        if f0.signum() != f1.signum() && !f1.is_nan() && !f0.is_nan() {
            return bisect(&f, x0, x1, x_tol).ok();
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        return Some(Root {
            x: x0,
            residual: 0.0,
            iterations: 0,
        });
    }
    None
}

/// Locate the point where `pred` flips between `lo` and `hi`.
///
/// Requires `pred(lo) != pred(hi)`; returns `(inside, outside)`, the final
/// pair of points straddling the flip, where `inside` has the value
/// `pred(lo)` had.
pub fn bisect_transition<P>(pred: P, lo: f64, hi: f64, x_tol: f64) -> Result<(f64, f64)>
where
    P: Fn(f64) -> bool,
{
    let p_lo = pred(lo);
    if p_lo == pred(hi) {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: format!("predicate is {p_lo} at both ends"),
        });
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        if (b - a).abs() <= x_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if pred(mid) == p_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}
