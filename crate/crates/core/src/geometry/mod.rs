//! Road-aligned geometry shared by the decision and planning layers.
//!
//! A [`ReferencePath`] is a lane centerline resampled at a fixed arclength
//! step. Frenét states `(s, s_dot, d, d_dot)` are converted to Cartesian
//! `(x, y, v, theta)` with the standard transform, and [`QuinticPolynomial`]
//! provides the jerk-optimal boundary-value primitive used by the planner.

mod frenet;
mod path;
mod quintic;
mod rect;

pub use frenet::{CartesianState, FrenetState};
pub use path::{PathSample, ReferencePath, DEFAULT_CORRIDOR, RESAMPLE_STEP};
pub use quintic::{BoundaryState, QuinticPolynomial};
pub use rect::OrientedRect;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate path: {0}")]
    DegeneratePath(String),
    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("lateral offset {d} at curvature {kappa} is past the curvature center")]
    SingularOffset { d: f64, kappa: f64 },
    #[error("lateral rate {d_dot} incompatible with speed {v}")]
    InvalidLateralRate { d_dot: f64, v: f64 },
    #[error("negative longitudinal speed {0}")]
    NegativeSpeed(f64),
    #[error("projection onto path is ambiguous near s = {0} and s = {1}")]
    ProjectionAmbiguous(f64, f64),
    #[error("point lies outside the {corridor} m corridor around the path")]
    OutsideCorridor { corridor: f64 },
    #[error("duration must be positive, got {0}")]
    NonpositiveDuration(f64),
}

/// Wraps an angle to `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
