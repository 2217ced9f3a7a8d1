//! Vehicles, roads, discrete actions and the safe-distance rules that bound
//! them.

mod action;
mod safety;
mod scenario;

pub use action::{advance_fraction, apply_action, Action, ActionParams, DecisionState};
pub use safety::{
    follower_speed_floor, leader_speed_cap, shortest_safe_distance, velocity_limits,
    EmptyInterval, Neighbor, SafetyParams, VehicleGeometry,
};
pub use scenario::{
    Behavior, JitterDoc, LaneLayout, Occupancy, RampDoc, Ramp, Road, RoadDoc, Role, Scenario, ScenarioDoc,
    ScriptEntry, VehicleDoc, VehicleSpec, DEFAULT_SPEED_LIMIT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("action {0} is not applicable here")]
    UnsupportedAction(Action),
    #[error("unknown action tag {0:?}")]
    UnknownAction(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("io error: {0}")]
    Io(String),
}
