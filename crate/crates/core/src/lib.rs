//! Cooperative multi-vehicle decision-making and trajectory planning.
//!
//! The engine runs in two stages. A joint Monte-Carlo tree search over
//! *metanodes* assigns one discrete action per controlled vehicle and per
//! decision step, trading each vehicle's own reward against the flow's via a
//! cooperation factor. Each controlled vehicle then turns the leading part of
//! its action sequence into a continuous trajectory: quintic Frenét
//! candidates scored by habit-specific weights and checked against the
//! predicted motion of every other vehicle. The closed loop re-plans at 2 Hz
//! and re-decides every decision step.

pub mod cli;
pub mod decision;
pub mod geometry;
pub mod model;
pub mod plot;
pub mod prediction;
pub mod planner;
pub mod simloop;
