use serde::{Deserialize, Serialize};

use super::DecisionError;
use crate::model::{
    advance_fraction, follower_speed_floor, leader_speed_cap, shortest_safe_distance,
    velocity_limits, Action, ActionParams, DecisionState, LaneLayout, Neighbor, Occupancy,
    SafetyParams, VehicleGeometry,
};
use crate::prediction::{integrate_follower, CarFollowingParams, Lead, TICK};

const EPS: f64 = 1e-9;

/// Static description of one vehicle taking part in a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowVehicle {
    pub id: u32,
    pub controlled: bool,
    pub geometry: VehicleGeometry,
    pub gamma: f64,
    /// Lane the vehicle wants to end up in (its current lane when keeping lane).
    pub target_lane: usize,
    /// Car-following law of an uncontrolled vehicle.
    pub follow: CarFollowingParams,
}

/// Dynamic per-vehicle part of a [`FlowState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleFlowState {
    pub state: DecisionState,
    pub last_action: Option<Action>,
    /// Distance driven while occupying only the target lane (m).
    pub in_target: f64,
}

/// Joint snapshot of every vehicle at one decision step, in roster order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub step: u32,
    pub vehicles: Vec<VehicleFlowState>,
}

impl FlowState {
    pub fn new(states: &[DecisionState], last_actions: &[Option<Action>]) -> Self {
        Self {
            step: 0,
            vehicles: states
                .iter()
                .zip(last_actions)
                .map(|(s, a)| VehicleFlowState { state: *s, last_action: *a, in_target: 0.0 })
                .collect(),
        }
    }
}

/// One action per controlled vehicle, in the problem's controlled order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointAction(pub Vec<Action>);

/// Everything the search needs to know about the road and the vehicles.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    pub layout: LaneLayout,
    pub actions: ActionParams,
    pub safety: SafetyParams,
    vehicles: Vec<FlowVehicle>,
    controlled: Vec<usize>,
    /// When false, joint actions are the raw product of all controlled
    /// actions without any feasibility filtering.
    pub pruning: bool,
}

/// Successor of every vehicle for a fixed joint action plus the actions the
/// vehicles took, aligned with the roster.
#[derive(Debug, Clone, Copy)]
struct Move {
    action: Action,
    from: DecisionState,
    to: DecisionState,
}

impl DecisionProblem {
    /// Builds a problem; vehicles are ordered by id.
    pub fn new(
        layout: LaneLayout,
        actions: ActionParams,
        safety: SafetyParams,
        mut vehicles: Vec<FlowVehicle>,
    ) -> Result<Self, DecisionError> {
        vehicles.sort_by_key(|v| v.id);
        if vehicles.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(DecisionError::InvalidProblem("duplicate vehicle id".into()));
        }
        if let Some(v) = vehicles.iter().find(|v| !(0.0..=1.0).contains(&v.gamma)) {
            return Err(DecisionError::InvalidProblem(format!(
                "vehicle {} has gamma {} outside [0, 1]",
                v.id, v.gamma
            )));
        }
        let controlled: Vec<usize> =
            (0..vehicles.len()).filter(|&i| vehicles[i].controlled).collect();
        if controlled.is_empty() {
            return Err(DecisionError::InvalidProblem("no controlled vehicle".into()));
        }
        Ok(Self { layout, actions, safety, vehicles, controlled, pruning: true })
    }

    pub fn vehicles(&self) -> &[FlowVehicle] {
        &self.vehicles
    }

    /// Roster indices of the controlled vehicles, ascending id.
    pub fn controlled(&self) -> &[usize] {
        &self.controlled
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    pub fn occupancy(&self, d: f64) -> Occupancy {
        self.layout.occupancy(d, self.actions.delta_d)
    }

    pub fn in_target_lane(&self, idx: usize, d: f64) -> bool {
        self.occupancy(d).is_only(self.vehicles[idx].target_lane)
    }

    /// Every controlled vehicle has driven far enough inside its target lane.
    pub fn intentions_done(&self, flow: &FlowState, distance: f64) -> bool {
        self.controlled.iter().all(|&i| flow.vehicles[i].in_target >= distance)
    }

    fn step_ticks(&self) -> usize {
        (self.actions.dt / TICK).round().max(1.0) as usize
    }

    /// One decision step of an uncontrolled vehicle: lane kept, speed from
    /// the car-following law against the nearest current leader in its lane
    /// (moving at constant speed).
    fn uncontrolled_successor(&self, flow: &FlowState, idx: usize) -> DecisionState {
        let me = flow.vehicles[idx].state;
        let lane = self.layout.nearest_lane(me.d);
        let mut lead: Option<(f64, Lead)> = None;
        for (j, other) in flow.vehicles.iter().enumerate() {
            let o = other.state;
            if j == idx || o.s <= me.s || !self.occupancy(o.d).contains(lane) {
                continue;
            }
            if lead.is_none_or(|(best, _)| o.s - me.s < best) {
                let gap = o.s - me.s
                    - 0.5 * (self.vehicles[idx].geometry.length + self.vehicles[j].geometry.length);
                lead = Some((o.s - me.s, Lead { gap, v: o.v }));
            }
        }
        let ticks = self.step_ticks();
        let dt = self.actions.dt / ticks as f64;
        let traj = integrate_follower(
            me.s,
            me.v,
            lead.map(|(_, l)| l),
            &self.vehicles[idx].follow,
            dt,
            ticks,
        );
        let (s, v) = *traj.last().unwrap();
        DecisionState { s, d: me.d, v }
    }

    /// Successors of all uncontrolled vehicles (controlled entries hold the
    /// current state).
    fn uncontrolled_successors(&self, flow: &FlowState) -> Vec<DecisionState> {
        (0..self.vehicles.len())
            .map(|i| {
                if self.vehicles[i].controlled {
                    flow.vehicles[i].state
                } else {
                    self.uncontrolled_successor(flow, i)
                }
            })
            .collect()
    }

    fn controlled_successor(&self, state: &DecisionState, action: Action) -> DecisionState {
        advance_fraction(state, action, &self.actions, self.layout.speed_limit, 1.0)
            .expect("controlled vehicles never take KL")
    }

    /// Admissible speed interval of vehicle `idx` at the current flow is empty.
    fn squeezed(&self, flow: &FlowState, idx: usize) -> bool {
        let me = flow.vehicles[idx].state;
        let l_me = self.vehicles[idx].geometry.length;
        for lane in self.occupancy(me.d).lanes() {
            let mut lead: Option<Neighbor> = None;
            let mut follow: Option<Neighbor> = None;
            for (j, other) in flow.vehicles.iter().enumerate() {
                let o = other.state;
                if j == idx || !self.occupancy(o.d).contains(lane) {
                    continue;
                }
                let gap = (o.s - me.s).abs() - 0.5 * (l_me + self.vehicles[j].geometry.length);
                let slot = if o.s > me.s { &mut lead } else { &mut follow };
                if slot.is_none_or(|n| gap < n.gap) {
                    *slot = Some(Neighbor { gap, v: o.v });
                }
            }
            if velocity_limits(lead, follow, &self.safety, self.layout.speed_limit).is_err() {
                return true;
            }
        }
        false
    }

    /// Whether `action` survives the single-vehicle rules: road borders, the
    /// ramp end, speed saturation, and the admissible speed interval against
    /// the stepped uncontrolled vehicles and the merge end.
    fn action_admissible(
        &self,
        flow: &FlowState,
        idx: usize,
        action: Action,
        next_unc: &[DecisionState],
    ) -> bool {
        let cur = flow.vehicles[idx].state;
        let geom = self.vehicles[idx].geometry;
        let limit = self.layout.speed_limit;
        match action {
            Action::AC if cur.v >= limit - EPS => return false,
            Action::DC if cur.v <= EPS => return false,
            _ => {}
        }
        let nx = self.controlled_successor(&cur, action);
        let cur_occ = self.occupancy(cur.d);
        let ramp = self.layout.ramp;

        if action.is_lane_change() {
            let on_ramp = ramp.is_some_and(|r| cur_occ.contains(r.lane));
            let hi = match ramp {
                Some(r) if on_ramp && nx.s + 0.5 * geom.length <= r.merge_end_s => {
                    self.layout.lane_center(r.lane)
                }
                _ => self.layout.lane_center(self.layout.main_lanes - 1),
            };
            if nx.d < self.layout.lane_center(0) - EPS || nx.d > hi + EPS {
                return false;
            }
        }
        let nx_occ = self.occupancy(nx.d);
        if let Some(r) = ramp {
            if nx_occ.contains(r.lane) && nx.s + 0.5 * geom.length > r.merge_end_s {
                return false;
            }
        }

        for lane in nx_occ.lanes() {
            let mut lead: Option<(f64, Neighbor)> = None;
            let mut follow: Option<(f64, Neighbor)> = None;
            for (j, o) in next_unc.iter().enumerate() {
                if self.vehicles[j].controlled || !self.occupancy(o.d).contains(lane) {
                    continue;
                }
                let ds = o.s - nx.s;
                let gap = ds.abs() - 0.5 * (geom.length + self.vehicles[j].geometry.length);
                let n = Neighbor { gap, v: o.v };
                if ds > 0.0 {
                    if lead.is_none_or(|(b, _)| ds < b) {
                        lead = Some((ds, n));
                    }
                } else if follow.is_none_or(|(b, _)| -ds < b) {
                    follow = Some((-ds, n));
                }
            }
            if let Some(r) = ramp.filter(|r| r.lane == lane) {
                let gap = r.merge_end_s - (nx.s + 0.5 * geom.length);
                let ds = r.merge_end_s - nx.s;
                if lead.is_none_or(|(b, _)| ds < b) {
                    lead = Some((ds, Neighbor { gap, v: 0.0 }));
                }
            }
            if let Some((_, n)) = lead {
                if nx.v > leader_speed_cap(n.gap, n.v, &self.safety) + EPS {
                    return false;
                }
            }
            // Followers already in the lane regulate themselves; only a lane
            // being entered imposes a speed floor.
            if !cur_occ.contains(lane) {
                if let Some((_, n)) = follow {
                    if nx.v < follower_speed_floor(n.gap, n.v, &self.safety) - EPS {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn vehicle_actions_with(
        &self,
        flow: &FlowState,
        idx: usize,
        next_unc: &[DecisionState],
    ) -> Vec<Action> {
        if self.squeezed(flow, idx) {
            return vec![Action::DC];
        }
        // A vehicle between two lanes finishes or reverses its change.
        let between = self.occupancy(flow.vehicles[idx].state.d).secondary.is_some();
        let out: Vec<Action> = Action::CONTROLLED
            .into_iter()
            .filter(|&a| !between || a.is_lane_change())
            .filter(|&a| self.action_admissible(flow, idx, a, next_unc))
            .collect();
        if out.is_empty() {
            vec![Action::DC]
        } else {
            out
        }
    }

    /// Single-vehicle action set of controlled vehicle `id`. Falls back to
    /// `[DC]` when nothing survives or the vehicle's slot is already
    /// infeasible.
    pub fn enumerate_vehicle_actions(
        &self,
        flow: &FlowState,
        id: u32,
    ) -> Result<Vec<Action>, DecisionError> {
        let idx = self.index_of(id).ok_or(DecisionError::UnknownVehicle(id))?;
        if !self.vehicles[idx].controlled {
            return Err(DecisionError::NotControlled(id));
        }
        let next_unc = self.uncontrolled_successors(flow);
        Ok(self.vehicle_actions_with(flow, idx, &next_unc))
    }

    fn state_at(&self, m: &Move, controlled: bool, frac: f64) -> DecisionState {
        if frac >= 1.0 {
            m.to
        } else if controlled {
            advance_fraction(&m.from, m.action, &self.actions, self.layout.speed_limit, frac)
                .expect("controlled vehicles never take KL")
        } else {
            DecisionState {
                s: m.from.s + frac * (m.to.s - m.from.s),
                d: m.from.d,
                v: m.from.v + frac * (m.to.v - m.from.v),
            }
        }
    }

    /// Pairwise joint-action rule for vehicles `i` and `j` (at least one
    /// controlled): no body overlap or overtaking through each other, no lane
    /// entry closer than the rear vehicle's shortest safe distance, and
    /// controlled vehicles sharing a lane keep an admissible headway.
    fn pair_compatible(&self, i: usize, mi: &Move, j: usize, mj: &Move) -> bool {
        let (vi, vj) = (&self.vehicles[i], &self.vehicles[j]);
        let half_len = 0.5 * (vi.geometry.length + vj.geometry.length);
        let half_wid = 0.5 * (vi.geometry.width + vj.geometry.width);
        let occ_i0 = self.occupancy(mi.from.d);
        let occ_j0 = self.occupancy(mj.from.d);

        for frac in [0.5, 1.0] {
            let a = self.state_at(mi, vi.controlled, frac);
            let b = self.state_at(mj, vj.controlled, frac);
            let ds = b.s - a.s;
            if ds.abs() < half_len - EPS && (b.d - a.d).abs() < half_wid - EPS {
                return false;
            }
            let (oa, ob) = (self.occupancy(a.d), self.occupancy(b.d));
            if !oa.intersects(&ob) {
                continue;
            }
            // Passing through each other within one step.
            let ds0 = mj.from.s - mi.from.s;
            if occ_i0.intersects(&occ_j0) && ds0 * ds < 0.0 {
                return false;
            }
            let entered = oa
                .lanes()
                .filter(|&l| ob.contains(l))
                .any(|l| !occ_i0.contains(l) || !occ_j0.contains(l));
            if entered && (mi.action.is_lane_change() || mj.action.is_lane_change()) {
                let (rear, front) = if ds >= 0.0 { (a, b) } else { (b, a) };
                let gap = ds.abs() - half_len;
                if gap < shortest_safe_distance(rear.v, front.v, &self.safety) - EPS {
                    return false;
                }
            }
        }

        if vi.controlled && vj.controlled {
            let (a, b) = (mi.to, mj.to);
            if self.occupancy(a.d).intersects(&self.occupancy(b.d)) {
                let ((rear, rear_act), front) =
                    if b.s >= a.s { ((a, mi.action), b) } else { ((b, mj.action), a) };
                let gap = (front.s - rear.s) - half_len;
                let gap0 = (mj.from.s - mi.from.s).abs() - half_len;
                let capped = rear.v <= leader_speed_cap(gap, front.v, &self.safety) + EPS;
                let opening = rear_act == Action::DC && gap >= gap0 - EPS;
                if !(capped || opening) {
                    return false;
                }
            }
        }
        true
    }

    /// Joint-rule check exposed for oracles: would `actions` (one per
    /// controlled vehicle) be accepted, given each vehicle's admissible set?
    pub fn joint_admissible(&self, flow: &FlowState, actions: &[Action]) -> bool {
        let next_unc = self.uncontrolled_successors(flow);
        for (k, &c) in self.controlled.iter().enumerate() {
            if !self.vehicle_actions_with(flow, c, &next_unc).contains(&actions[k]) {
                return false;
            }
        }
        let moves = self.moves(flow, actions, &next_unc);
        for i in 0..moves.len() {
            for j in i + 1..moves.len() {
                if (self.vehicles[i].controlled || self.vehicles[j].controlled)
                    && !self.pair_compatible(i, &moves[i], j, &moves[j])
                {
                    return false;
                }
            }
        }
        true
    }

    fn moves(&self, flow: &FlowState, actions: &[Action], next_unc: &[DecisionState]) -> Vec<Move> {
        let mut moves: Vec<Move> = (0..self.vehicles.len())
            .map(|i| Move { action: Action::KL, from: flow.vehicles[i].state, to: next_unc[i] })
            .collect();
        for (k, &c) in self.controlled.iter().enumerate() {
            let from = flow.vehicles[c].state;
            moves[c] = Move { action: actions[k], from, to: self.controlled_successor(&from, actions[k]) };
        }
        moves
    }

    fn successor_flow(&self, flow: &FlowState, moves: &[Move]) -> FlowState {
        let vehicles = moves
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let prev = &flow.vehicles[i];
                let in_target = if self.vehicles[i].controlled && self.in_target_lane(i, m.to.d) {
                    prev.in_target + (m.to.s - m.from.s)
                } else {
                    0.0
                };
                VehicleFlowState {
                    state: m.to,
                    last_action: if self.vehicles[i].controlled { Some(m.action) } else { None },
                    in_target,
                }
            })
            .collect();
        FlowState { step: flow.step + 1, vehicles }
    }

    /// Successor flow for one joint action (no feasibility checks).
    pub fn successor(&self, flow: &FlowState, joint: &JointAction) -> FlowState {
        let next_unc = self.uncontrolled_successors(flow);
        let moves = self.moves(flow, &joint.0, &next_unc);
        self.successor_flow(flow, &moves)
    }

    /// All admissible joint actions and their successor flows, in
    /// lexicographic order of the per-vehicle action lists.
    pub fn expand_combinations(
        &self,
        flow: &FlowState,
    ) -> Result<Vec<(JointAction, FlowState)>, DecisionError> {
        let next_unc = self.uncontrolled_successors(flow);
        let base: Vec<Move> = (0..self.vehicles.len())
            .map(|i| Move { action: Action::KL, from: flow.vehicles[i].state, to: next_unc[i] })
            .collect();

        // Per controlled vehicle: candidate moves that already agree with
        // every uncontrolled vehicle.
        let options: Vec<Vec<Move>> = self
            .controlled
            .iter()
            .map(|&c| {
                let from = flow.vehicles[c].state;
                let acts: Vec<Action> = if self.pruning {
                    self.vehicle_actions_with(flow, c, &next_unc)
                } else {
                    Action::CONTROLLED.to_vec()
                };
                acts.into_iter()
                    .map(|a| Move { action: a, from, to: self.controlled_successor(&from, a) })
                    .filter(|m| {
                        !self.pruning
                            || (0..self.vehicles.len()).all(|u| {
                                self.vehicles[u].controlled || {
                                    let (lo, hi, ml, mh) =
                                        if c < u { (c, u, m, &base[u]) } else { (u, c, &base[u], m) };
                                    self.pair_compatible(lo, ml, hi, mh)
                                }
                            })
                    })
                    .collect()
            })
            .collect();

        let mut out = Vec::new();
        let mut chosen: Vec<Move> = Vec::with_capacity(self.controlled.len());
        self.backtrack(flow, &base, &options, &mut chosen, &mut out);
        if out.is_empty() {
            return Err(DecisionError::NoValidCombination);
        }
        Ok(out)
    }

    fn backtrack(
        &self,
        flow: &FlowState,
        base: &[Move],
        options: &[Vec<Move>],
        chosen: &mut Vec<Move>,
        out: &mut Vec<(JointAction, FlowState)>,
    ) {
        let k = chosen.len();
        if k == options.len() {
            let mut moves = base.to_vec();
            for (m, &c) in chosen.iter().zip(&self.controlled) {
                moves[c] = *m;
            }
            let joint = JointAction(chosen.iter().map(|m| m.action).collect());
            out.push((joint, self.successor_flow(flow, &moves)));
            return;
        }
        let ck = self.controlled[k];
        for m in &options[k] {
            let ok = !self.pruning
                || chosen
                    .iter()
                    .zip(&self.controlled)
                    .all(|(prev, &cp)| self.pair_compatible(cp, prev, ck, m));
            if ok {
                chosen.push(*m);
                self.backtrack(flow, base, options, chosen, out);
                chosen.pop();
            }
        }
    }

    /// Actions each controlled vehicle may choose, for random playouts.
    pub(crate) fn playout_options(&self, flow: &FlowState) -> (Vec<Vec<Action>>, Vec<DecisionState>) {
        let next_unc = self.uncontrolled_successors(flow);
        let opts = self
            .controlled
            .iter()
            .map(|&c| {
                if self.pruning {
                    self.vehicle_actions_with(flow, c, &next_unc)
                } else {
                    Action::CONTROLLED.to_vec()
                }
            })
            .collect();
        (opts, next_unc)
    }

    /// Joint check of a candidate playout step; returns the successor when
    /// every pair rule holds.
    pub(crate) fn try_joint(
        &self,
        flow: &FlowState,
        actions: &[Action],
        next_unc: &[DecisionState],
    ) -> Option<FlowState> {
        let moves = self.moves(flow, actions, next_unc);
        if self.pruning {
            for i in 0..moves.len() {
                for j in i + 1..moves.len() {
                    if (self.vehicles[i].controlled || self.vehicles[j].controlled)
                        && !self.pair_compatible(i, &moves[i], j, &moves[j])
                    {
                        return None;
                    }
                }
            }
        }
        Some(self.successor_flow(flow, &moves))
    }
}
