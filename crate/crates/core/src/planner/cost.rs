use serde::{Deserialize, Serialize};

use super::trajectory::TrajectoryPoint;
use super::weights::WeightVector;
use crate::geometry::OrientedRect;
use crate::model::{shortest_safe_distance, SafetyParams, VehicleGeometry};
use crate::prediction::PredictedTrajectory;

/// Unweighted cost sums of one sub-trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub curvature: f64,
    pub heading: f64,
    pub offset: f64,
    pub acceleration: f64,
    pub jerk: f64,
    pub obstacle: f64,
}

impl CostBreakdown {
    /// Weighted sum. A zero weight drops its term even when the term is
    /// infinite.
    pub fn total(&self, w: &WeightVector) -> f64 {
        [
            (w.w_cur, self.curvature),
            (w.w_phi, self.heading),
            (w.w_out, self.offset),
            (w.w_acc, self.acceleration),
            (w.w_jerk, self.jerk),
            (w.w_obs, self.obstacle),
        ]
        .iter()
        .filter(|(k, _)| *k != 0.0)
        .map(|(k, x)| k * x)
        .sum()
    }
}

/// Smoothness and lane-keeping sums over `points` (the shared start point
/// excluded). `lane_center` is `None` during lane changes, which switches
/// the offset term off.
pub fn cost_terms(points: &[TrajectoryPoint], lane_center: Option<f64>, obstacle: f64) -> CostBreakdown {
    let mut c = CostBreakdown { obstacle, ..Default::default() };
    for p in points.iter().skip(1) {
        c.curvature += p.kappa * p.kappa;
        let phi = p.relative_heading();
        c.heading += phi * phi;
        if let Some(center) = lane_center {
            c.offset += (p.d - center).powi(2);
        }
        c.acceleration += p.s_ddot * p.s_ddot;
        c.jerk += p.s_dddot * p.s_dddot;
    }
    c
}

/// Proximity cost of one obstacle body against the ego body.
///
/// The alert zone reaches the shortest safe distance ahead of the ego body,
/// one and a half body lengths behind it and one and a half body widths to
/// either side. Inside the zone the cost falls off linearly with the
/// body-frame gaps; outside it is zero, and overlapping bodies cost infinity.
pub fn obstacle_term(
    ego: &OrientedRect,
    ego_v: f64,
    other: &OrientedRect,
    other_v: f64,
    safety: &SafetyParams,
    c_z: f64,
) -> f64 {
    if ego.overlaps(other) {
        return f64::INFINITY;
    }
    let (gx, gy) = ego.body_frame_gaps(other);
    let safe = shortest_safe_distance(ego_v.max(0.0), other_v.max(0.0), safety);
    let rear = 1.5 * ego.length;
    let side = 1.5 * ego.width;
    let reach = if gx > 0.0 { safe } else { rear };
    let ax = gx.abs();
    if (ax > 0.0 && ax >= reach) || gy >= side {
        return 0.0;
    }
    c_z * (2.0 - ax / (safe + rear) - gy / side)
}

/// Obstacle cost summed over every point (start excluded) and every
/// forecast that covers the point's tick.
pub fn obstacle_cost(
    points: &[TrajectoryPoint],
    geometry: &VehicleGeometry,
    predictions: &[PredictedTrajectory],
    safety: &SafetyParams,
    c_z: f64,
) -> f64 {
    let mut total = 0.0;
    for p in points.iter().skip(1) {
        let ego = OrientedRect::new(p.x, p.y, p.theta, geometry.length, geometry.width);
        for pred in predictions {
            let Some(o) = pred.at_tick(p.tick) else { continue };
            let other = OrientedRect::new(o.x, o.y, o.theta, pred.geometry.length, pred.geometry.width);
            total += obstacle_term(&ego, p.v, &other, o.v, safety, c_z);
            if total.is_infinite() {
                return total;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ego() -> OrientedRect {
        OrientedRect::new(0.0, 0.0, 0.0, 5.0, 2.0)
    }

    #[test]
    fn zone_midpoint_costs_one_unit() {
        // Behind by half the longitudinal extent, beside by half the lateral one.
        let p = SafetyParams::default();
        let safe = shortest_safe_distance(10.0, 10.0, &p);
        let gx = 0.5 * (safe + 7.5);
        let other = OrientedRect::new(-(2.5 + gx + 2.5), 1.0 + 1.5 + 1.0, 0.0, 5.0, 2.0);
        let c = obstacle_term(&ego(), 10.0, &other, 10.0, &p, 1.0);
        assert!((c - 1.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn outside_zone_is_free_and_overlap_is_infinite() {
        let p = SafetyParams::default();
        let far = OrientedRect::new(40.0, 0.0, 0.0, 5.0, 2.0);
        assert_eq!(obstacle_term(&ego(), 10.0, &far, 10.0, &p, 10.0), 0.0);
        let wide = OrientedRect::new(0.0, 5.0, 0.0, 5.0, 2.0);
        assert_eq!(obstacle_term(&ego(), 10.0, &wide, 10.0, &p, 10.0), 0.0);
        let hit = OrientedRect::new(3.0, 0.5, 0.0, 5.0, 2.0);
        assert!(obstacle_term(&ego(), 10.0, &hit, 10.0, &p, 10.0).is_infinite());
    }

    #[test]
    fn weighted_total_is_linear_and_skips_zero_weights() {
        let c = CostBreakdown { curvature: 1.0, heading: 2.0, offset: 3.0, acceleration: 4.0, jerk: 5.0, obstacle: f64::INFINITY };
        let w = WeightVector { w_obs: 0.0, ..WeightVector::normal() };
        let t = c.total(&w);
        assert_eq!(t, 1.0 + 2.0 + 15.0 + 4.0 + 5.0);
        assert_eq!(c.total(&w.scaled(3.0)), 3.0 * t);
    }
}
