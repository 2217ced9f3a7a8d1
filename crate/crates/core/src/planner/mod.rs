//! Trajectory planning for one controlled vehicle: each decided action is
//! turned into a sampled end-state region, candidate quintic sub-trajectories
//! are scored by a habit-weighted cost, and the cheapest feasible candidate
//! is chained into the next segment until the horizon is covered.

mod cost;
mod feasibility;
mod region;
mod trajectory;
mod weights;

pub use cost::{cost_terms, obstacle_cost, obstacle_term, CostBreakdown};
pub use feasibility::{check_feasible, Infeasibility, KinematicLimits};
pub use region::{sample_targets, target_region_for, LaneContext, RegionMargins, TargetStateRegion};
pub use trajectory::{generate_subtrajectory, KinematicState, SubTrajectory, TrajectoryPoint};
pub use weights::{WeightSet, WeightVector};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrenetState, GeometryError, QuinticPolynomial, BoundaryState};
use crate::model::{Action, ActionParams, Road, SafetyParams, VehicleGeometry};
use crate::prediction::PredictedTrajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("empty target region: {0}")]
    RegionEmpty(String),
    #[error("invalid weights: {0}")]
    WeightSchema(String),
    #[error("unknown weight vector {0:?}")]
    UnknownWeights(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("nothing to plan")]
    EmptySchedule,
}

/// Tunables of the sampling planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub speed_samples: usize,
    pub offset_samples: usize,
    /// Obstacle cost scale.
    pub c_z: f64,
    pub tick: f64,
    pub horizon_ticks: usize,
    pub emergency_decel: f64,
    pub margins: RegionMargins,
    pub limits: KinematicLimits,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            speed_samples: 5,
            offset_samples: 3,
            c_z: 10.0,
            tick: 0.1,
            horizon_ticks: 30,
            emergency_decel: 4.0,
            margins: RegionMargins::default(),
            limits: KinematicLimits::default(),
        }
    }
}

/// One action's share of the planning horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub action: Action,
    pub ticks: usize,
    /// Nominal lateral offset at the start of the action's decision step.
    pub origin_d: f64,
    /// Speed at the start of the decision step when the segment resumes a
    /// step already under way; speed targets are then measured from it.
    pub origin_v: Option<f64>,
    /// Ticks of the step driven before this segment starts.
    pub elapsed: usize,
}

/// Splits a decided sequence into planning segments covering at least
/// `horizon_ticks`. The first segment is what remains of the current step
/// after `elapsed` ticks; the sequence is padded with lane keeping.
pub fn schedule_segments(
    sequence: &[Action],
    elapsed: usize,
    step_ticks: usize,
    horizon_ticks: usize,
    origin_d: f64,
    origin_v: Option<f64>,
    params: &ActionParams,
) -> Vec<SegmentSpec> {
    let mut out = Vec::new();
    let mut covered = 0;
    let mut origin = origin_d;
    let mut k = 0;
    while covered < horizon_ticks {
        let action = sequence.get(k).copied().unwrap_or(Action::KL);
        let ticks = if k == 0 { step_ticks.saturating_sub(elapsed).max(1) } else { step_ticks };
        let (origin_v, elapsed) = if k == 0 && elapsed > 0 { (origin_v, elapsed) } else { (None, 0) };
        out.push(SegmentSpec { action, ticks, origin_d: origin, origin_v, elapsed });
        origin += action.lateral_sign() * params.delta_d;
        covered += ticks;
        k += 1;
    }
    out
}

/// Everything the planner needs for one vehicle at one replanning tick.
#[derive(Debug, Clone, Copy)]
pub struct PlanRequest<'a> {
    pub vehicle_id: u32,
    pub geometry: VehicleGeometry,
    pub start_tick: u64,
    pub start: KinematicState,
    pub segments: &'a [SegmentSpec],
    pub weights: &'a WeightVector,
    /// Forecasts of every other vehicle, starting at `start_tick`.
    pub predictions: &'a [PredictedTrajectory],
    pub road: &'a Road,
    pub actions: &'a ActionParams,
    pub safety: &'a SafetyParams,
    pub config: &'a PlannerConfig,
}

/// A scored candidate of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub end_speed: f64,
    pub end_offset: f64,
    pub points: Vec<TrajectoryPoint>,
    pub breakdown: CostBreakdown,
    pub cost: f64,
    pub verdict: Result<(), Infeasibility>,
}

/// Summary of the winning candidate of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedSegment {
    pub action: Action,
    pub first_tick: u64,
    pub ticks: usize,
    pub nominal_d: f64,
    pub cost: f64,
    pub candidates: usize,
    pub feasible: usize,
}

/// A full planned trajectory, one point per tick from the start tick on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vehicle_id: u32,
    pub start_tick: u64,
    pub points: Vec<TrajectoryPoint>,
    pub segments: Vec<PlannedSegment>,
    pub emergency: bool,
}

impl Trajectory {
    pub fn at_tick(&self, tick: u64) -> Option<&TrajectoryPoint> {
        tick.checked_sub(self.start_tick)
            .and_then(|k| self.points.get(k as usize))
    }

    pub fn end_tick(&self) -> u64 {
        self.start_tick + self.points.len().saturating_sub(1) as u64
    }

    /// Road-frame states per tick. Round-off below zero at a standstill is
    /// clamped; vehicles never reverse.
    pub fn frenet_states(&self) -> Vec<FrenetState> {
        self.points
            .iter()
            .map(|p| FrenetState { s_dot: p.s_dot.max(0.0), ..p.frenet() })
            .collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.segments.iter().map(|s| s.cost).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FailureReason {
    #[error("{0}")]
    Region(PlannerError),
    #[error("all {candidates} candidates infeasible, e.g. {example}")]
    NoFeasibleCandidate { candidates: usize, example: Infeasibility },
}

/// Planning failed on segment `segment` (0-based).
#[derive(Debug, Error, Clone, PartialEq)]
#[error("planning failed on segment {segment} ({action}): {reason}")]
pub struct PlanFailure {
    pub segment: usize,
    pub action: Action,
    pub reason: FailureReason,
}

fn lane_context(req: &PlanRequest, spec: &SegmentSpec, start: &KinematicState) -> LaneContext {
    let layout = &req.road.layout;
    let horizon = spec.ticks as f64 * req.config.tick;
    let front = start.s + start.s_dot.max(0.0) * horizon + 0.5 * req.geometry.length;
    let (lo, hi) = layout.lateral_bounds(front);
    let half = 0.5 * req.geometry.width;
    LaneContext {
        origin_d: spec.origin_d,
        d_bounds: (lo + half, hi - half),
        max_speed: req.config.limits.max_speed(layout.speed_limit),
    }
}

/// Generates, scores and checks every candidate of segment `index` starting
/// from `start` at `start_tick`, in sampling order.
pub fn evaluate_segment(
    req: &PlanRequest,
    index: usize,
    start: &KinematicState,
    start_tick: u64,
) -> Result<Vec<Candidate>, PlannerError> {
    let spec = req.segments.get(index).ok_or(PlannerError::EmptySchedule)?;
    let cfg = req.config;
    let lane = lane_context(req, spec, start);
    let duration = spec.ticks as f64 * cfg.tick;
    let (base_v, base_t) = match spec.origin_v {
        Some(v) => (v, (spec.elapsed + spec.ticks) as f64 * cfg.tick),
        None => (start.s_dot, duration),
    };
    let region = target_region_for(
        spec.action,
        (base_v, base_t),
        duration,
        &lane,
        req.actions,
        &cfg.margins,
        (cfg.speed_samples, cfg.offset_samples),
    )?;
    let center = (!spec.action.is_lane_change()).then(|| lane.nominal_end(spec.action, req.actions));
    let layout = &req.road.layout;
    let mut out = Vec::new();
    for (end_speed, end_offset) in sample_targets(&region) {
        let sub = generate_subtrajectory(start, start_tick, end_speed, end_offset, spec.ticks, cfg.tick, &req.road.path)?;
        let obstacle = obstacle_cost(&sub.points, &req.geometry, req.predictions, req.safety, cfg.c_z);
        let breakdown = cost_terms(&sub.points, center, obstacle);
        let cost = breakdown.total(req.weights);
        let verdict = check_feasible(&sub.points, &req.geometry, layout, &cfg.limits, req.predictions);
        out.push(Candidate { end_speed, end_offset, points: sub.points, breakdown, cost, verdict });
    }
    Ok(out)
}

/// Cheapest feasible candidate; ties keep the earlier sample.
pub fn select_candidate(candidates: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.verdict.is_err() || c.cost.is_nan() {
            continue;
        }
        if best.is_none_or(|b| c.cost < candidates[b].cost) {
            best = Some(i);
        }
    }
    best
}

/// Plans every segment in order, each starting from the end of the previous
/// winner.
pub fn plan(req: &PlanRequest) -> Result<Trajectory, PlanFailure> {
    let fail = |segment: usize, reason: FailureReason| PlanFailure {
        segment,
        action: req.segments[segment].action,
        reason,
    };
    if req.segments.is_empty() {
        return Err(PlanFailure {
            segment: 0,
            action: Action::KL,
            reason: FailureReason::Region(PlannerError::EmptySchedule),
        });
    }
    let mut state = req.start;
    let mut tick = req.start_tick;
    let mut points: Vec<TrajectoryPoint> = Vec::new();
    let mut segments = Vec::new();
    for (i, spec) in req.segments.iter().enumerate() {
        let cands = evaluate_segment(req, i, &state, tick).map_err(|e| fail(i, FailureReason::Region(e)))?;
        let feasible = cands.iter().filter(|c| c.verdict.is_ok()).count();
        let Some(best) = select_candidate(&cands) else {
            let example = cands
                .iter()
                .find_map(|c| c.verdict.err())
                .expect("no candidate passed, so one failed");
            return Err(fail(i, FailureReason::NoFeasibleCandidate { candidates: cands.len(), example }));
        };
        let chosen = &cands[best];
        let skip = usize::from(!points.is_empty());
        points.extend_from_slice(&chosen.points[skip..]);
        let lane = lane_context(req, spec, &state);
        segments.push(PlannedSegment {
            action: spec.action,
            first_tick: tick,
            ticks: spec.ticks,
            nominal_d: lane.nominal_end(spec.action, req.actions),
            cost: chosen.cost,
            candidates: cands.len(),
            feasible,
        });
        let last = chosen.points.last().expect("segments have points");
        state = last.kinematic();
        tick = last.tick;
    }
    Ok(Trajectory { vehicle_id: req.vehicle_id, start_tick: req.start_tick, points, segments, emergency: false })
}

/// Last-resort plan: brake at `decel` to a stop while easing onto `hold_d`.
pub fn emergency_trajectory(
    vehicle_id: u32,
    start_tick: u64,
    start: &KinematicState,
    hold_d: f64,
    ticks: usize,
    decel: f64,
    road: &Road,
    tick: f64,
) -> Result<Trajectory, PlannerError> {
    let duration = ticks.max(1) as f64 * tick;
    let lateral = QuinticPolynomial::fit(
        BoundaryState::new(start.d, start.d_dot, start.d_ddot),
        BoundaryState::new(hold_d, 0.0, 0.0),
        duration,
    )?;
    let v0 = start.s_dot.max(0.0);
    let stop = if decel > 0.0 { v0 / decel } else { f64::INFINITY };
    let mut points = Vec::with_capacity(ticks + 1);
    for k in 0..=ticks {
        let t = k as f64 * tick;
        let tb = t.min(stop);
        let (s, v, a) = if t < stop {
            (start.s + v0 * tb - 0.5 * decel * tb * tb, v0 - decel * tb, -decel)
        } else {
            (start.s + v0 * tb - 0.5 * decel * tb * tb, 0.0, 0.0)
        };
        let [d, d_dot, d_ddot, _] = lateral.eval_unchecked(t.min(duration));
        points.push(trajectory::make_point(start_tick + k as u64, s, v.max(0.0), a, 0.0, d, d_dot, d_ddot, &road.path)?);
    }
    trajectory::fill_curvature(&mut points);
    let segments = vec![PlannedSegment {
        action: Action::DC,
        first_tick: start_tick,
        ticks,
        nominal_d: hold_d,
        cost: 0.0,
        candidates: 1,
        feasible: 1,
    }];
    Ok(Trajectory { vehicle_id, start_tick, points, segments, emergency: true })
}

#[cfg(test)]
mod tests;
