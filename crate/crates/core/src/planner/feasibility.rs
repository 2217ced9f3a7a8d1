use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trajectory::TrajectoryPoint;
use crate::geometry::OrientedRect;
use crate::model::{LaneLayout, VehicleGeometry};
use crate::prediction::PredictedTrajectory;

/// Hard kinematic bounds on planned motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicLimits {
    pub max_curvature: f64,
    pub max_accel: f64,
    /// Top speed as a multiple of the speed limit.
    pub speed_factor: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self { max_curvature: 0.2, max_accel: 4.0, speed_factor: 1.1 }
    }
}

impl KinematicLimits {
    pub fn max_speed(&self, speed_limit: f64) -> f64 {
        self.speed_factor * speed_limit
    }
}

/// First violated constraint of a candidate, by tick.
#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
pub enum Infeasibility {
    #[error("curvature {kappa:.4} at tick {tick}")]
    Curvature { tick: u64, kappa: f64 },
    #[error("acceleration {accel:.3} at tick {tick}")]
    Acceleration { tick: u64, accel: f64 },
    #[error("speed {v:.3} at tick {tick}")]
    Speed { tick: u64, v: f64 },
    #[error("body leaves the road at tick {tick} (d = {d:.3})")]
    OffRoad { tick: u64, d: f64 },
    #[error("collision with vehicle {other} at tick {tick}")]
    Collision { tick: u64, other: u32 },
}

/// Checks every point after the start against the kinematic limits, the
/// drivable lateral range at the body's front bumper, and the forecast
/// bodies of all other vehicles.
pub fn check_feasible(
    points: &[TrajectoryPoint],
    geometry: &VehicleGeometry,
    layout: &LaneLayout,
    limits: &KinematicLimits,
    predictions: &[PredictedTrajectory],
) -> Result<(), Infeasibility> {
    const EPS: f64 = 1e-9;
    let max_speed = limits.max_speed(layout.speed_limit);
    for p in points.iter().skip(1) {
        if !(p.kappa.abs() <= limits.max_curvature + EPS) {
            return Err(Infeasibility::Curvature { tick: p.tick, kappa: p.kappa });
        }
        if !(p.s_ddot.abs() <= limits.max_accel + EPS) {
            return Err(Infeasibility::Acceleration { tick: p.tick, accel: p.s_ddot });
        }
        if !(p.v >= -EPS && p.s_dot >= -EPS && p.v <= max_speed + EPS) {
            return Err(Infeasibility::Speed { tick: p.tick, v: p.v.min(p.s_dot) });
        }
        let (lo, hi) = layout.lateral_bounds(p.s + 0.5 * geometry.length);
        let half = 0.5 * geometry.width;
        if p.d - half < lo - EPS || p.d + half > hi + EPS {
            return Err(Infeasibility::OffRoad { tick: p.tick, d: p.d });
        }
        let ego = OrientedRect::new(p.x, p.y, p.theta, geometry.length, geometry.width);
        for pred in predictions {
            let Some(o) = pred.at_tick(p.tick) else { continue };
            let other = OrientedRect::new(o.x, o.y, o.theta, pred.geometry.length, pred.geometry.width);
            if ego.overlaps(&other) {
                return Err(Infeasibility::Collision { tick: p.tick, other: pred.id });
            }
        }
    }
    Ok(())
}
