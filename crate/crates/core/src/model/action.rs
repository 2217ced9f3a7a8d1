use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Discrete per-step manoeuvre.
///
/// `KL` (car following in the current lane) is reserved for uncontrolled
/// vehicles; the planner also uses it to tag lane-keeping padding segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    KS,
    AC,
    DC,
    LCL,
    LCR,
    KL,
}

impl Action {
    /// The five actions available to a controlled vehicle, in canonical order.
    pub const CONTROLLED: [Action; 5] = [Action::KS, Action::AC, Action::DC, Action::LCL, Action::LCR];

    pub fn is_lane_change(self) -> bool {
        matches!(self, Action::LCL | Action::LCR)
    }

    /// Lateral direction of the action: -1 for left, +1 for right.
    pub fn lateral_sign(self) -> f64 {
        match self {
            Action::LCL => -1.0,
            Action::LCR => 1.0,
            _ => 0.0,
        }
    }

    /// Human-facing signal shown while the action executes.
    pub fn signal(self) -> Option<&'static str> {
        match self {
            Action::LCL => Some("left turn signal"),
            Action::LCR => Some("right turn signal"),
            Action::DC => Some("brake light"),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::KS => "KS",
            Action::AC => "AC",
            Action::DC => "DC",
            Action::LCL => "LCL",
            Action::LCR => "LCR",
            Action::KL => "KL",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Action {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "KS" => Action::KS,
            "AC" => Action::AC,
            "DC" => Action::DC,
            "LCL" => Action::LCL,
            "LCR" => Action::LCR,
            "KL" => Action::KL,
            other => return Err(ModelError::UnknownAction(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionParams {
    pub a_acc: f64,
    pub a_dec: f64,
    /// Partial lane-change width; one full lane change is two actions.
    pub delta_d: f64,
    #[serde(rename = "dt_decision")]
    pub dt: f64,
}

impl Default for ActionParams {
    fn default() -> Self {
        Self {
            a_acc: 0.6,
            a_dec: 0.6,
            delta_d: 1.75,
            dt: 1.5,
        }
    }
}

/// Decision-level state in the road frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionState {
    pub s: f64,
    pub d: f64,
    pub v: f64,
}

/// Longitudinal displacement and final speed after accelerating at `accel`
/// for `dt`, with the speed saturating at `0` or `v_max`.
fn saturated_motion(v: f64, accel: f64, dt: f64, v_max: f64) -> (f64, f64) {
    if accel == 0.0 {
        return (v * dt, v);
    }
    let bound = if accel > 0.0 { v_max.max(v) } else { 0.0 };
    let v_end = v + accel * dt;
    if (accel > 0.0 && v_end <= bound) || (accel < 0.0 && v_end >= bound) {
        return (v * dt + 0.5 * accel * dt * dt, v_end);
    }
    let t_hit = (bound - v) / accel;
    (v * t_hit + 0.5 * accel * t_hit * t_hit + bound * (dt - t_hit), bound)
}

/// State after executing `action` for the fraction `frac` of a decision step.
///
/// Longitudinal motion follows constant acceleration (saturating at standstill
/// and the speed limit); the lateral offset ramps linearly.
pub fn advance_fraction(
    state: &DecisionState,
    action: Action,
    params: &ActionParams,
    speed_limit: f64,
    frac: f64,
) -> Result<DecisionState, ModelError> {
    let accel = match action {
        Action::KS | Action::LCL | Action::LCR => 0.0,
        Action::AC => params.a_acc,
        Action::DC => -params.a_dec,
        Action::KL => return Err(ModelError::UnsupportedAction(action)),
    };
    let (ds, v) = saturated_motion(state.v, accel, frac * params.dt, speed_limit);
    Ok(DecisionState {
        s: state.s + ds,
        d: state.d + frac * action.lateral_sign() * params.delta_d,
        v,
    })
}

/// One decision step of `action`:
///
/// | action | (delta s, delta d, delta v) |
/// |--------|-----------------------------|
/// | KS  | (v dt, 0, 0) |
/// | AC  | (v dt + a_acc dt^2 / 2, 0, a_acc dt) |
/// | DC  | (v dt - a_dec dt^2 / 2, 0, -a_dec dt) |
/// | LCL | (v dt, -delta_d, 0) |
/// | LCR | (v dt, +delta_d, 0) |
pub fn apply_action(
    state: &DecisionState,
    action: Action,
    params: &ActionParams,
    speed_limit: f64,
) -> Result<DecisionState, ModelError> {
    advance_fraction(state, action, params, speed_limit, 1.0)
}
