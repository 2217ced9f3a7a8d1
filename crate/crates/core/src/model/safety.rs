use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyParams {
    /// Reaction time (s).
    pub tau: f64,
    /// Minimum time headway (s).
    pub mth: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self { tau: 0.5, mth: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleGeometry {
    pub length: f64,
    pub width: f64,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        Self { length: 5.0, width: 2.0 }
    }
}

/// `D_s = v tau + MTH max(v - v_lead, 0)`.
///
/// A vehicle slower than its leader still keeps the reaction distance, so the
/// speed difference only ever lengthens the gap.
pub fn shortest_safe_distance(v: f64, v_lead: f64, p: &SafetyParams) -> f64 {
    (v * p.tau + p.mth * (v - v_lead).max(0.0)).max(0.0)
}

/// Admissible speed interval that is empty because the follower constraint
/// exceeds the leader constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Neighbour seen by [`velocity_limits`]: bumper-to-bumper gap and speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub gap: f64,
    pub v: f64,
}

/// Upper speed bound imposed by a leader at `gap` moving at `v_lead`.
pub fn leader_speed_cap(gap: f64, v_lead: f64, p: &SafetyParams) -> f64 {
    ((p.mth * v_lead + gap) / (p.tau + p.mth)).min(gap / p.tau)
}

/// Lower speed bound imposed by a follower at `gap` moving at `v_follow`.
pub fn follower_speed_floor(gap: f64, v_follow: f64, p: &SafetyParams) -> f64 {
    v_follow - (gap - p.tau * v_follow) / p.mth
}

/// Speed interval admissible between a leader and a follower.
///
/// Absent neighbours (or infinite gaps) leave the corresponding side
/// unconstrained: `[0, speed_limit]`.
pub fn velocity_limits(
    lead: Option<Neighbor>,
    follow: Option<Neighbor>,
    p: &SafetyParams,
    speed_limit: f64,
) -> Result<(f64, f64), EmptyInterval> {
    let upper = match lead {
        Some(n) if n.gap.is_finite() => leader_speed_cap(n.gap, n.v, p).min(speed_limit),
        _ => speed_limit,
    };
    let lower = match follow {
        Some(n) if n.gap.is_finite() => follower_speed_floor(n.gap, n.v, p).max(0.0),
        _ => 0.0,
    };
    if lower > upper {
        Err(EmptyInterval { lower, upper })
    } else {
        Ok((lower, upper))
    }
}
