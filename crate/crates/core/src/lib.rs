//! Numerical laboratory for the sine-feedback process map
//! `A_{t+1} = A_t + g·sin(A_t)`.
//!
//! Modules, bottom-up:
//!
//! - [`map`]: evaluation of the map, its derivative, iterates, multipliers
//!   and critical points.
//! - [`orbit`]: orbits with transient removal, display transforms,
//!   behaviour classification and cobweb traces.
//! - [`stability`]: fixed points of `fⁿ` and their stability across g.
//! - [`threshold`]: bios onset, ballistic window onsets and the L-step
//!   small-window condition.
//! - [`window`]: periodic-window detection from critical-point iterates
//!   and Q-curves.
//! - [`scan`]: parallel parameter sweeps and CSV / NDJSON emission.
//! - [`recipe`]: named sweeps reproducing the standard figures.

// `!(x < y)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod map;
pub mod orbit;
pub mod recipe;
pub mod roots;
pub mod scan;
pub mod stability;
pub mod tables;
pub mod threshold;
pub mod window;

pub use error::{Error, Result};
pub use map::{CriticalBranch, CriticalPair, MapParams};
pub use orbit::{
    BehaviorKind, BehaviorLabel, ClassifyTolerances, Direction, OrbitRecord, OrbitSettings,
};
pub use scan::{IcPolicy, ScanGrid, ScanResult, Transform};
pub use stability::{FixedPointRecord, Stability, StabilitySweep};
pub use threshold::{ThresholdKind, ThresholdResult};
pub use window::{QCurve, WindowInterval, WindowPredicateSpec};
