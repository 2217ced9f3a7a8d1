//! Closed-loop simulation: a 10 Hz world with periodic joint decisions,
//! parallel per-vehicle replanning over a frozen snapshot, car-following
//! (optionally scripted) uncontrolled traffic, plan-failure aborts, logging
//! and run metrics.

mod log;
mod metrics;

pub use log::{
    CollisionRecord, DecisionRecord, PlanEvent, PlanEventKind, PlanRecord, RosterEntry, SimLog, Termination,
    TickRecord, VehicleRecord,
};
pub use metrics::{aggregate, compute_metrics, in_lane, Aggregate, FinishTime, Metrics};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{search, DecisionProblem, FlowState, FlowVehicle, MctsConfig};
use crate::geometry::{CartesianState, FrenetState, OrientedRect};
use crate::model::{advance_fraction, Action, DecisionState, Scenario, ScriptEntry, VehicleGeometry};
use crate::planner::{
    emergency_trajectory, plan, schedule_segments, KinematicState, PlanFailure, PlanRequest,
    PlannerConfig, Trajectory, WeightSet, WeightVector,
};
use crate::prediction::{
    ballistic_step, follow_acceleration, predict_controlled_peer, predict_uncontrolled,
    CarFollowingParams, Lead, PredictedTrajectory, PublishedPlan, Snapshot, TrackedVehicle,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

/// Whether controlled vehicles run through the trajectory planner or
/// execute decision-level actions directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Full,
    DecisionOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::DecisionOnly => "decision-only",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Mode::Full),
            "decision-only" => Ok(Mode::DecisionOnly),
            other => Err(format!("unknown mode {other:?} (expected full or decision-only)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// World tick (s).
    pub tick: f64,
    pub replan_ticks: usize,
    pub decision_ticks: usize,
    /// Decision steps per search.
    pub decision_depth: usize,
    pub plan_ticks: usize,
    /// Maximum simulated time (s).
    pub max_duration: f64,
    pub seed: u64,
    pub mode: Mode,
    pub mcts: MctsConfig,
    pub planner: PlannerConfig,
    pub pruning: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick: 0.1,
            replan_ticks: 5,
            decision_ticks: 15,
            decision_depth: 7,
            plan_ticks: 30,
            max_duration: 30.0,
            seed: 0,
            mode: Mode::Full,
            mcts: MctsConfig::default(),
            planner: PlannerConfig::default(),
            pruning: true,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(src: &str) -> Result<Self, SimError> {
        toml::from_str(src).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if !(self.tick > 0.0) {
            return bad("tick must be positive");
        }
        if self.replan_ticks == 0 || self.decision_ticks == 0 {
            return bad("replan and decision periods must be at least one tick");
        }
        if self.decision_ticks % self.replan_ticks != 0 {
            return bad("decision period must be a multiple of the replan period");
        }
        if self.plan_ticks > self.decision_ticks * self.decision_depth {
            return bad("planning horizon exceeds the decision horizon");
        }
        if self.plan_ticks < self.replan_ticks {
            return bad("planning horizon shorter than the replan period");
        }
        if (self.planner.tick - self.tick).abs() > 1e-12 {
            return bad("planner tick differs from the world tick");
        }
        if !(self.max_duration > 0.0) {
            return bad("max duration must be positive");
        }
        if self.mcts.max_depth != self.decision_depth {
            return bad("search depth differs from the decision depth");
        }
        Ok(())
    }
}

struct Agent {
    id: u32,
    controlled: bool,
    geometry: VehicleGeometry,
    gamma: f64,
    target_lane: usize,
    weights: WeightVector,
    script: Vec<ScriptEntry>,
    state: KinematicState,
    cart: CartesianState,
    plan: Option<Trajectory>,
    /// Decided sequence, anchored at `anchor_tick` with nominal offset
    /// `anchor_d` at its start.
    seq: Vec<Action>,
    anchor_tick: u64,
    anchor_d: f64,
    /// Decision-only mode: state at the start of the running step.
    step_start: DecisionState,
}

/// Mixes the run seed with the decision counter.
fn search_seed(seed: u64, count: u64) -> u64 {
    seed ^ count.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Engine<'a> {
    sc: &'a Scenario,
    cfg: SimConfig,
    agents: Vec<Agent>,
    tick: u64,
    next_decision: u64,
    log: SimLog,
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario, weights: &WeightSet, cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let params = sc.actions();
        let step = (params.dt / cfg.tick).round();
        if (step * cfg.tick - params.dt).abs() > 1e-9 || step as usize != cfg.decision_ticks {
            return Err(SimError::Config(format!(
                "decision step {} s is not {} ticks",
                params.dt, cfg.decision_ticks
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let jitter = sc.doc.jitter.unwrap_or_default();
        let mut specs: Vec<_> = sc.vehicles.iter().collect();
        specs.sort_by_key(|v| v.id);
        let mut agents = Vec::with_capacity(specs.len());
        for v in specs {
            let mut ds = 0.0;
            let mut dv = 0.0;
            if jitter.s > 0.0 {
                ds = rng.gen_range(-jitter.s..=jitter.s);
            }
            if jitter.v > 0.0 {
                dv = rng.gen_range(-jitter.v..=jitter.v);
            }
            let weights = *weights
                .get(&v.weights_id)
                .map_err(|e| SimError::ScenarioInvalid(format!("vehicle {}: {e}", v.id)))?;
            let d = sc.road.lane_center(v.lane0);
            let state = KinematicState {
                s: v.initial.s + ds,
                s_dot: (v.initial.v + dv).max(0.0),
                d,
                ..Default::default()
            };
            agents.push(Agent {
                id: v.id,
                controlled: v.is_controlled(),
                geometry: v.geometry,
                gamma: v.gamma,
                target_lane: v.intended_lane(),
                weights,
                script: v.script.clone(),
                state,
                cart: CartesianState::default(),
                plan: None,
                seq: Vec::new(),
                anchor_tick: 0,
                anchor_d: d,
                step_start: DecisionState { s: state.s, d, v: state.s_dot },
            });
        }
        let roster = sc
            .vehicles
            .iter()
            .map(|v| RosterEntry {
                id: v.id,
                controlled: v.is_controlled(),
                behavior: v.behavior,
                gamma: v.gamma,
                weights_id: v.weights_id.clone(),
                target_lane: v.intended_lane(),
                length: v.geometry.length,
                width: v.geometry.width,
            })
            .collect::<Vec<_>>();
        let mut roster = roster;
        roster.sort_by_key(|r| r.id);
        let log = SimLog {
            scenario_id: sc.id().to_string(),
            seed: cfg.seed,
            mode: cfg.mode,
            tick: cfg.tick,
            max_duration: cfg.max_duration,
            layout: sc.road.layout,
            roster,
            ticks: Vec::new(),
            decisions: Vec::new(),
            plans: Vec::new(),
            plan_events: Vec::new(),
            collision: None,
            termination: Termination::Timeout,
        };
        let mut eng = Self { sc, cfg, agents, tick: 0, next_decision: 0, log };
        for i in 0..eng.agents.len() {
            eng.agents[i].cart = eng.cartesian(&eng.agents[i].state)?;
        }
        if let Some((a, b)) = eng.first_overlap() {
            return Err(SimError::ScenarioInvalid(format!(
                "vehicles {a} and {b} overlap at the start (seed {})",
                cfg.seed
            )));
        }
        Ok(eng)
    }

    fn cartesian(&self, k: &KinematicState) -> Result<CartesianState, SimError> {
        let path = &self.sc.road.path;
        let f = FrenetState { s: k.s.clamp(0.0, path.length()), s_dot: k.s_dot.max(0.0), d: k.d, d_dot: k.d_dot };
        path.frenet_to_cartesian(&f)
            .map_err(|e| SimError::Internal(format!("pose at s = {:.3}: {e}", k.s)))
    }

    fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.tick
    }

    fn delta_d(&self) -> f64 {
        self.sc.actions().delta_d
    }

    fn snap(&self, d: f64) -> f64 {
        let dd = self.delta_d();
        (d / dd).round() * dd
    }

    /// Desired speed and acceleration cap of an uncontrolled vehicle now.
    fn follow_params(&self, a: &Agent) -> CarFollowingParams {
        let base = CarFollowingParams::default().with_desired_speed(self.sc.road.speed_limit);
        let t = self.time();
        match a.script.iter().rev().find(|e| e.t <= t + 1e-9) {
            Some(e) => CarFollowingParams {
                v0: e.desired_speed,
                a_max: e.max_accel.unwrap_or(base.a_max),
                ..base
            },
            None => base,
        }
    }

    fn rects(&self) -> Vec<OrientedRect> {
        self.agents
            .iter()
            .map(|a| OrientedRect::new(a.cart.x, a.cart.y, a.cart.theta, a.geometry.length, a.geometry.width))
            .collect()
    }

    fn first_overlap(&self) -> Option<(u32, u32)> {
        let r = self.rects();
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                if r[i].overlaps(&r[j]) {
                    return Some((self.agents[i].id, self.agents[j].id));
                }
            }
        }
        None
    }

    /// Index of the running step and ticks already spent in it.
    fn step_position(&self, a: &Agent) -> (usize, usize) {
        let since = (self.tick - a.anchor_tick) as usize;
        (since / self.cfg.decision_ticks, since % self.cfg.decision_ticks)
    }

    fn step_origin(&self, a: &Agent, idx: usize) -> f64 {
        let dd = self.delta_d();
        a.anchor_d + a.seq.iter().take(idx).map(|x| x.lateral_sign() * dd).sum::<f64>()
    }

    fn current_action(&self, a: &Agent) -> Action {
        if !a.controlled {
            return Action::KL;
        }
        if a.plan.as_ref().is_some_and(|p| p.emergency) {
            return Action::DC;
        }
        let (idx, _) = self.step_position(a);
        a.seq.get(idx).copied().unwrap_or(Action::KL)
    }

    fn record(&mut self) {
        let vehicles = self
            .agents
            .iter()
            .map(|a| VehicleRecord {
                id: a.id,
                s: a.state.s,
                d: a.state.d,
                x: a.cart.x,
                y: a.cart.y,
                v: a.cart.v,
                theta: a.cart.theta,
                lane: self.sc.road.nearest_lane(a.state.d),
                action: self.current_action(a),
            })
            .collect();
        self.log.ticks.push(TickRecord { tick: self.tick, vehicles });
    }

    fn all_in_target(&self) -> bool {
        self.agents
            .iter()
            .filter(|a| a.controlled)
            .all(|a| in_lane(&self.sc.road.layout, a.state.d, a.geometry.width, a.target_lane))
    }

    fn decide(&mut self) -> Result<(), SimError> {
        let params = self.sc.actions();
        let vehicles: Vec<FlowVehicle> = self
            .agents
            .iter()
            .map(|a| FlowVehicle {
                id: a.id,
                controlled: a.controlled,
                geometry: a.geometry,
                gamma: a.gamma,
                target_lane: if a.controlled { a.target_lane } else { self.sc.road.nearest_lane(a.state.d) },
                follow: self.follow_params(a),
            })
            .collect();
        let mut problem = DecisionProblem::new(self.sc.road.layout, params, self.sc.safety(), vehicles)
            .map_err(|e| SimError::Internal(e.to_string()))?;
        problem.pruning = self.cfg.pruning;
        let states: Vec<DecisionState> = self
            .agents
            .iter()
            .map(|a| DecisionState {
                s: a.state.s,
                d: if a.controlled { self.snap(a.state.d) } else { a.state.d },
                v: a.state.s_dot.max(0.0),
            })
            .collect();
        let last: Vec<Option<Action>> = self
            .agents
            .iter()
            .map(|a| (a.controlled && !a.seq.is_empty()).then(|| self.current_action(a)))
            .collect();
        let root = FlowState::new(&states, &last);
        let mcts = MctsConfig {
            seed: search_seed(self.cfg.seed, self.log.decisions.len() as u64),
            ..self.cfg.mcts
        };
        let (out, stats) = search(&problem, &root, &mcts).map_err(|e| SimError::Internal(e.to_string()))?;
        for (i, a) in self.agents.iter_mut().enumerate() {
            if !a.controlled {
                continue;
            }
            let seq = out
                .sequence(a.id)
                .ok_or_else(|| SimError::Internal(format!("no sequence for vehicle {}", a.id)))?;
            a.seq = seq.to_vec();
            a.anchor_tick = self.tick;
            a.anchor_d = states[i].d;
            a.step_start = DecisionState { s: a.state.s, d: a.state.d, v: a.state.s_dot };
        }
        self.log.decisions.push(DecisionRecord {
            tick: self.tick,
            sequences: out.sequences,
            expanded_nodes: stats.expanded_nodes,
            root_combinations: stats.root_combinations,
            emergency: out.emergency,
        });
        self.next_decision = self.tick + self.cfg.decision_ticks as u64;
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            tick: self.tick,
            layout: self.sc.road.layout,
            delta_d: self.delta_d(),
            vehicles: self
                .agents
                .iter()
                .map(|a| TrackedVehicle {
                    id: a.id,
                    controlled: a.controlled,
                    state: a.state.frenet(),
                    geometry: a.geometry,
                    follow: self.follow_params(a),
                })
                .collect(),
        }
    }

    fn predictions_for(
        &self,
        snap: &Snapshot,
        published: &[Option<(u64, Vec<FrenetState>)>],
        me: usize,
        steps: usize,
    ) -> Result<Vec<PredictedTrajectory>, SimError> {
        let path = &self.sc.road.path;
        let mut out = Vec::with_capacity(self.agents.len() - 1);
        for (j, other) in self.agents.iter().enumerate() {
            if j == me {
                continue;
            }
            let p = if other.controlled {
                let plan = published[j]
                    .as_ref()
                    .map(|(start, states)| PublishedPlan { start_tick: *start, states });
                predict_controlled_peer(snap, path, other.id, plan, steps)
            } else {
                predict_uncontrolled(snap, path, other.id, steps)
            };
            out.push(p.map_err(|e| SimError::Internal(format!("forecast of {}: {e}", other.id)))?);
        }
        Ok(out)
    }

    fn plan_one(
        &self,
        idx: usize,
        seq: &[Action],
        elapsed: usize,
        origin: f64,
        origin_v: Option<f64>,
        predictions: &[PredictedTrajectory],
    ) -> Result<Trajectory, PlanFailure> {
        let a = &self.agents[idx];
        let params = self.sc.actions();
        let safety = self.sc.safety();
        let segments = schedule_segments(
            seq,
            elapsed,
            self.cfg.decision_ticks,
            self.cfg.plan_ticks,
            origin,
            origin_v,
            &params,
        );
        let req = PlanRequest {
            vehicle_id: a.id,
            geometry: a.geometry,
            start_tick: self.tick,
            start: a.state,
            segments: &segments,
            weights: &a.weights,
            predictions,
            road: &self.sc.road,
            actions: &params,
            safety: &safety,
            config: &self.cfg.planner,
        };
        plan(&req)
    }

    fn forecast_steps(&self) -> usize {
        self.cfg.plan_ticks + self.cfg.decision_ticks
    }

    fn replan(&mut self) -> Result<(), SimError> {
        let snap = self.snapshot();
        let published: Vec<Option<(u64, Vec<FrenetState>)>> = self
            .agents
            .iter()
            .map(|a| a.plan.as_ref().map(|p| (p.start_tick, p.frenet_states())))
            .collect();
        let steps = self.forecast_steps();
        let controlled: Vec<usize> = (0..self.agents.len()).filter(|&i| self.agents[i].controlled).collect();
        let this = &*self;
        let results: Vec<Result<(Vec<PredictedTrajectory>, Result<Trajectory, PlanFailure>), SimError>> = controlled
            .par_iter()
            .map(|&i| {
                let preds = this.predictions_for(&snap, &published, i, steps)?;
                let a = &this.agents[i];
                let (idx, elapsed) = this.step_position(a);
                let origin = this.step_origin(a, idx);
                let seq = a.seq.get(idx..).unwrap_or(&[]);
                let origin_v = (idx == 0).then_some(a.step_start.v);
                let planned = this.plan_one(i, seq, elapsed, origin, origin_v, &preds);
                Ok((preds, planned))
            })
            .collect();
        for (&i, res) in controlled.iter().zip(results) {
            let (preds, planned) = res?;
            match planned {
                Ok(t) => self.adopt(i, t),
                Err(f) => self.abort(i, f, &preds)?,
            }
        }
        Ok(())
    }

    fn adopt(&mut self, i: usize, t: Trajectory) {
        self.log.plans.push(PlanRecord {
            tick: t.start_tick,
            id: t.vehicle_id,
            emergency: t.emergency,
            actions: t.segments.iter().map(|s| s.action).collect(),
            cost: t.total_cost(),
            samples: t.points.iter().map(|p| [p.s, p.d, p.v]).collect(),
        });
        self.agents[i].plan = Some(t);
    }

    /// Replaces the vehicle's remaining sequence with decelerate-then-keep
    /// towards the center of the lane its running step started in; brakes in
    /// that lane if even that cannot be planned.
    fn abort(&mut self, i: usize, failure: PlanFailure, preds: &[PredictedTrajectory]) -> Result<(), SimError> {
        let id = self.agents[i].id;
        self.log.plan_events.push(PlanEvent {
            tick: self.tick,
            id,
            kind: PlanEventKind::Failure {
                segment: failure.segment,
                action: failure.action,
                reason: failure.reason.to_string(),
            },
        });
        let (idx, _) = self.step_position(&self.agents[i]);
        let origin = self.step_origin(&self.agents[i], idx);
        let road = &self.sc.road;
        let mut lane = road.nearest_lane(origin);
        let front = self.agents[i].state.s + 0.5 * self.agents[i].geometry.length;
        if road.lane_center(lane) + 0.5 * road.lane_width > road.lateral_bounds(front).1 {
            lane = road.main_lanes - 1;
        }
        let hold = road.lane_center(lane);
        let fallback = [Action::DC, Action::KS];
        self.log.plan_events.push(PlanEvent { tick: self.tick, id, kind: PlanEventKind::Abort });
        let planned = self.plan_one(i, &fallback, 0, hold, None, preds);
        let a = &mut self.agents[i];
        a.seq = fallback.to_vec();
        a.anchor_tick = self.tick;
        a.anchor_d = hold;
        a.step_start = DecisionState { s: a.state.s, d: a.state.d, v: a.state.s_dot };
        match planned {
            Ok(t) => self.adopt(i, t),
            Err(_) => {
                let t = emergency_trajectory(
                    id,
                    self.tick,
                    &a.state,
                    hold,
                    self.cfg.plan_ticks,
                    self.cfg.planner.emergency_decel,
                    road,
                    self.cfg.tick,
                )
                .map_err(|e| SimError::Internal(format!("emergency plan for {id}: {e}")))?;
                self.log.plan_events.push(PlanEvent { tick: self.tick, id, kind: PlanEventKind::Emergency });
                self.adopt(i, t);
            }
        }
        self.next_decision = self.next_decision.min(self.tick + self.cfg.replan_ticks as u64);
        Ok(())
    }

    /// Nearest vehicle ahead whose body overlaps laterally with `me`'s.
    fn world_leader(&self, me: usize) -> Option<Lead> {
        let a = &self.agents[me];
        let mut best: Option<(f64, Lead)> = None;
        for (j, o) in self.agents.iter().enumerate() {
            if j == me || o.state.s <= a.state.s {
                continue;
            }
            if (o.state.d - a.state.d).abs() >= 0.5 * (a.geometry.width + o.geometry.width) + 0.3 {
                continue;
            }
            let ds = o.state.s - a.state.s;
            if best.is_none_or(|(b, _)| ds < b) {
                let gap = ds - 0.5 * (a.geometry.length + o.geometry.length);
                best = Some((ds, Lead { gap, v: o.state.s_dot }));
            }
        }
        best.map(|(_, l)| l)
    }

    fn advance(&mut self) -> Result<(), SimError> {
        let dt = self.cfg.tick;
        let next = self.tick + 1;
        let params = self.sc.actions();
        let limit = self.sc.road.speed_limit;
        let mut new_states = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let st = if !a.controlled {
                let p = self.follow_params(a);
                let acc = follow_acceleration(a.state.s_dot, self.world_leader(i), &p);
                let (s, v) = ballistic_step(a.state.s, a.state.s_dot, acc, dt);
                KinematicState { s, s_dot: v, s_ddot: acc, ..a.state }
            } else if self.cfg.mode == Mode::Full {
                match a.plan.as_ref().and_then(|p| p.at_tick(next)) {
                    Some(p) => p.kinematic(),
                    None => KinematicState {
                        s: a.state.s + a.state.s_dot * dt,
                        s_ddot: 0.0,
                        d_dot: 0.0,
                        d_ddot: 0.0,
                        ..a.state
                    },
                }
            } else {
                let since = (next - a.anchor_tick) as usize;
                let idx = (since - 1) / self.cfg.decision_ticks;
                let j = since - idx * self.cfg.decision_ticks;
                let action = a.seq.get(idx).copied().unwrap_or(Action::KS);
                let frac = j as f64 / self.cfg.decision_ticks as f64;
                let ds = advance_fraction(&a.step_start, action, &params, limit, frac)
                    .map_err(|e| SimError::Internal(e.to_string()))?;
                let accel = match action {
                    Action::AC if ds.v < limit => params.a_acc,
                    Action::DC if ds.v > 0.0 => -params.a_dec,
                    _ => 0.0,
                };
                KinematicState {
                    s: ds.s,
                    s_dot: ds.v,
                    s_ddot: accel,
                    d: ds.d,
                    d_dot: action.lateral_sign() * params.delta_d / params.dt,
                    d_ddot: 0.0,
                }
            };
            new_states.push(st);
        }
        for (i, st) in new_states.into_iter().enumerate() {
            let cart = self.cartesian(&st)?;
            let a = &mut self.agents[i];
            a.state = st;
            a.cart = cart;
        }
        self.tick = next;
        // Decision-only mode: roll the step origin at step boundaries.
        if self.cfg.mode == Mode::DecisionOnly {
            let k = self.cfg.decision_ticks as u64;
            for a in self.agents.iter_mut().filter(|a| a.controlled) {
                if (self.tick - a.anchor_tick) % k == 0 {
                    a.step_start = DecisionState { s: a.state.s, d: a.state.d, v: a.state.s_dot };
                }
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<SimLog, SimError> {
        let max_ticks = (self.cfg.max_duration / self.cfg.tick).round() as u64;
        loop {
            self.record();
            if let Some((a, b)) = self.first_overlap() {
                self.log.collision = Some(CollisionRecord { tick: self.tick, a, b });
                self.log.termination = Termination::Collision;
                break;
            }
            if self.all_in_target() {
                self.log.termination = Termination::Completed;
                break;
            }
            if self.tick >= max_ticks {
                self.log.termination = Termination::Timeout;
                break;
            }
            let replan_due = self.tick % self.cfg.replan_ticks as u64 == 0;
            let decided = self.tick >= self.next_decision;
            if decided {
                self.decide()?;
            }
            if self.cfg.mode == Mode::Full && (replan_due || decided) {
                self.replan()?;
            }
            self.advance()?;
        }
        Ok(self.log)
    }
}

/// Joint decision at the scenario's initial state.
pub fn decide_once(scenario: &Scenario, weights: &WeightSet, cfg: &SimConfig) -> Result<DecisionRecord, SimError> {
    let mut eng = Engine::new(scenario, weights, *cfg)?;
    eng.decide()?;
    Ok(eng.log.decisions.remove(0))
}

/// Outcome of one decide-and-plan cycle at the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCycle {
    pub decision: DecisionRecord,
    pub plans: Vec<PlanRecord>,
    pub events: Vec<PlanEvent>,
}

/// Decides and plans once at the scenario's initial state.
pub fn plan_once(scenario: &Scenario, weights: &WeightSet, cfg: &SimConfig) -> Result<PlanCycle, SimError> {
    let mut eng = Engine::new(scenario, weights, *cfg)?;
    eng.decide()?;
    eng.replan()?;
    Ok(PlanCycle {
        decision: eng.log.decisions.remove(0),
        plans: eng.log.plans,
        events: eng.log.plan_events,
    })
}

/// Runs one closed-loop simulation.
pub fn run(scenario: &Scenario, weights: &WeightSet, cfg: &SimConfig) -> Result<SimLog, SimError> {
    Engine::new(scenario, weights, *cfg)?.run()
}

#[cfg(test)]
mod tests;
