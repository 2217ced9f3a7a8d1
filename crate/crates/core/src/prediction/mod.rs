//! Motion of vehicles the planner does not control: an intelligent-driver
//! car-following law for uncontrolled vehicles, and short-horizon forecasts
//! of every other vehicle for the trajectory planner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrenetState, GeometryError, ReferencePath};
use crate::model::{LaneLayout, VehicleGeometry, DEFAULT_SPEED_LIMIT};

/// Fixed integration step of predictions and of the world (s).
pub const TICK: f64 = 0.1;

/// Smallest gap fed to the car-following law while integrating; a leader
/// closer than this is treated as touching.
const MIN_INTEGRATION_GAP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("gap {0} to the leader is not positive")]
    NonpositiveGap(f64),
    #[error("unknown vehicle {0}")]
    UnknownVehicle(u32),
    #[error("vehicle {0} is controlled; uncontrolled prediction does not apply")]
    NotUncontrolled(u32),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Intelligent-driver-model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarFollowingParams {
    /// Desired speed (m/s).
    pub v0: f64,
    pub a_max: f64,
    /// Comfortable deceleration (m/s^2).
    pub b: f64,
    /// Jam distance (m).
    pub s0: f64,
    /// Desired time headway (s).
    pub t_h: f64,
    pub delta: f64,
}

impl Default for CarFollowingParams {
    fn default() -> Self {
        Self {
            v0: DEFAULT_SPEED_LIMIT,
            a_max: 1.5,
            b: 2.0,
            s0: 2.0,
            t_h: 1.5,
            delta: 4.0,
        }
    }
}

impl CarFollowingParams {
    pub fn with_desired_speed(self, v0: f64) -> Self {
        Self { v0, ..self }
    }

    /// Hardest braking the law will command.
    pub fn max_brake(&self) -> f64 {
        2.0 * self.b
    }
}

/// IDM acceleration `a_max (1 - (v/v0)^delta - (s*/gap)^2)` with
/// `s* = s0 + v T_h + v (v - v_lead) / (2 sqrt(a_max b))`, clamped to
/// `[-2b, a_max]`. An infinite gap means no leader.
pub fn car_following_acceleration(
    v: f64,
    v_lead: f64,
    gap: f64,
    p: &CarFollowingParams,
) -> Result<f64, PredictionError> {
    if !(gap > 0.0) {
        return Err(PredictionError::NonpositiveGap(gap));
    }
    Ok(idm(v, v_lead, gap, p))
}

fn idm(v: f64, v_lead: f64, gap: f64, p: &CarFollowingParams) -> f64 {
    let free = if p.v0 > 0.0 {
        (v / p.v0).powf(p.delta)
    } else {
        f64::INFINITY
    };
    let interaction = if gap.is_finite() {
        let s_star = (p.s0 + v * p.t_h + v * (v - v_lead) / (2.0 * (p.a_max * p.b).sqrt())).max(0.0);
        (s_star / gap).powi(2)
    } else {
        0.0
    };
    let a = p.a_max * (1.0 - free - interaction);
    a.clamp(-p.max_brake(), p.a_max)
}

/// Leader seen by a follower: bumper gap and speed, both at the current time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lead {
    pub gap: f64,
    pub v: f64,
}

/// Advances `(s, v)` by one step of length `dt` under constant acceleration
/// `a`, stopping at standstill instead of reversing.
pub fn ballistic_step(s: f64, v: f64, a: f64, dt: f64) -> (f64, f64) {
    let v_end = v + a * dt;
    if v_end >= 0.0 {
        (s + 0.5 * (v + v_end) * dt, v_end)
    } else {
        (s + v * v / (-2.0 * a), 0.0)
    }
}

/// Car-following acceleration against an optional leader, tolerating
/// touching or overlapping bodies (treated as the minimum gap).
pub fn follow_acceleration(v: f64, lead: Option<Lead>, p: &CarFollowingParams) -> f64 {
    match lead {
        Some(l) => idm(v, l.v, l.gap.max(MIN_INTEGRATION_GAP), p),
        None => idm(v, v, f64::INFINITY, p),
    }
}

/// Integrates a follower for `steps` ticks of `dt` while its leader keeps
/// constant speed. Returns the states after every tick, initial state first.
pub fn integrate_follower(
    s: f64,
    v: f64,
    lead: Option<Lead>,
    p: &CarFollowingParams,
    dt: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(steps + 1);
    let (mut s_cur, mut v_cur) = (s, v);
    out.push((s_cur, v_cur));
    for k in 0..steps {
        let cur_lead = lead.map(|l| Lead {
            gap: l.gap + l.v * k as f64 * dt - (s_cur - s),
            v: l.v,
        });
        let a = follow_acceleration(v_cur, cur_lead, p);
        (s_cur, v_cur) = ballistic_step(s_cur, v_cur, a, dt);
        out.push((s_cur, v_cur));
    }
    out
}

/// One vehicle as frozen in a prediction snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedVehicle {
    pub id: u32,
    pub controlled: bool,
    pub state: FrenetState,
    pub geometry: VehicleGeometry,
    /// Car-following law (with this vehicle's desired speed) when it is
    /// uncontrolled, or when a controlled vehicle has no plan yet.
    pub follow: CarFollowingParams,
}

/// Frozen kinematics of all vehicles at one world tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tick: u64,
    pub layout: LaneLayout,
    /// Lateral width used to decide when a vehicle spans two lanes.
    pub delta_d: f64,
    pub vehicles: Vec<TrackedVehicle>,
}

impl Snapshot {
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    /// Nearest vehicle ahead of `idx` occupying `lane`, as a bumper gap and
    /// speed. Lowest id wins ties.
    pub fn leader_in_lane(&self, idx: usize, lane: usize) -> Option<Lead> {
        let me = &self.vehicles[idx];
        let mut best: Option<(f64, Lead)> = None;
        for (j, other) in self.vehicles.iter().enumerate() {
            if j == idx || other.state.s <= me.state.s {
                continue;
            }
            if !self.layout.occupancy(other.state.d, self.delta_d).contains(lane) {
                continue;
            }
            let ds = other.state.s - me.state.s;
            if best.is_none_or(|(b, _)| ds < b) {
                let gap = ds - 0.5 * (me.geometry.length + other.geometry.length);
                best = Some((ds, Lead { gap, v: other.state.s_dot }));
            }
        }
        best.map(|(_, l)| l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedSample {
    pub tick: u64,
    pub frenet: FrenetState,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
}

/// Forecast of one vehicle at consecutive ticks starting at the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedTrajectory {
    pub id: u32,
    pub geometry: VehicleGeometry,
    pub samples: Vec<PredictedSample>,
}

impl PredictedTrajectory {
    pub fn at_tick(&self, tick: u64) -> Option<&PredictedSample> {
        let first = self.samples.first()?.tick;
        tick.checked_sub(first)
            .and_then(|k| self.samples.get(k as usize))
    }
}

fn to_samples(
    path: &ReferencePath,
    start_tick: u64,
    states: impl Iterator<Item = FrenetState>,
) -> Result<Vec<PredictedSample>, PredictionError> {
    let len = path.length();
    states
        .enumerate()
        .map(|(k, f)| {
            // Forecasts may run past the modelled road end; hold the last pose.
            let clamped = FrenetState { s: f.s.min(len), ..f };
            let c = path.frenet_to_cartesian(&clamped)?;
            Ok(PredictedSample {
                tick: start_tick + k as u64,
                frenet: f,
                x: c.x,
                y: c.y,
                v: c.v,
                theta: c.theta,
            })
        })
        .collect()
}

/// Lane-keeping forecast: `d` pinned to the current lane center, speed from
/// the car-following law against the frozen same-lane leader.
fn follow_in_lane(
    snap: &Snapshot,
    path: &ReferencePath,
    idx: usize,
    steps: usize,
) -> Result<PredictedTrajectory, PredictionError> {
    let me = &snap.vehicles[idx];
    let lane = snap.layout.nearest_lane(me.state.d);
    let d = snap.layout.lane_center(lane);
    let lead = snap.leader_in_lane(idx, lane);
    let traj = integrate_follower(me.state.s, me.state.s_dot, lead, &me.follow, TICK, steps);
    let samples = to_samples(
        path,
        snap.tick,
        traj.into_iter().map(|(s, v)| FrenetState { s, s_dot: v, d, d_dot: 0.0 }),
    )?;
    Ok(PredictedTrajectory { id: me.id, geometry: me.geometry, samples })
}

/// Forecast of an uncontrolled vehicle over `steps` ticks (`steps + 1` samples).
pub fn predict_uncontrolled(
    snap: &Snapshot,
    path: &ReferencePath,
    id: u32,
    steps: usize,
) -> Result<PredictedTrajectory, PredictionError> {
    let idx = snap.index_of(id).ok_or(PredictionError::UnknownVehicle(id))?;
    if snap.vehicles[idx].controlled {
        return Err(PredictionError::NotUncontrolled(id));
    }
    follow_in_lane(snap, path, idx, steps)
}

/// A peer's most recently published plan in the road frame.
#[derive(Debug, Clone, Copy)]
pub struct PublishedPlan<'a> {
    pub start_tick: u64,
    pub states: &'a [FrenetState],
}

/// Forecast of a controlled peer: its published plan from the snapshot tick
/// on, extended at constant speed and offset past the plan's end. Without a
/// usable plan the peer is forecast like an uncontrolled vehicle.
pub fn predict_controlled_peer(
    snap: &Snapshot,
    path: &ReferencePath,
    id: u32,
    plan: Option<PublishedPlan<'_>>,
    steps: usize,
) -> Result<PredictedTrajectory, PredictionError> {
    let idx = snap.index_of(id).ok_or(PredictionError::UnknownVehicle(id))?;
    let me = &snap.vehicles[idx];
    let usable = plan.filter(|p| {
        p.start_tick <= snap.tick && ((snap.tick - p.start_tick) as usize) < p.states.len()
    });
    let Some(plan) = usable else {
        return follow_in_lane(snap, path, idx, steps);
    };
    let offset = (snap.tick - plan.start_tick) as usize;
    let tail = &plan.states[offset..];
    let last = *tail.last().unwrap();
    let states = (0..=steps).map(|k| match tail.get(k) {
        Some(f) => *f,
        None => {
            let extra = (k + 1 - tail.len()) as f64 * TICK;
            FrenetState {
                s: last.s + last.s_dot * extra,
                s_dot: last.s_dot,
                d: last.d,
                d_dot: 0.0,
            }
        }
    });
    let samples = to_samples(path, snap.tick, states)?;
    Ok(PredictedTrajectory { id: me.id, geometry: me.geometry, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scalar evaluation of the IDM law.
    fn oracle(v: f64, vl: f64, gap: f64, p: &CarFollowingParams) -> f64 {
        let s_star = p.s0 + v * p.t_h + v * (v - vl) / (2.0 * (p.a_max * p.b).sqrt());
        let raw = p.a_max * (1.0 - (v / p.v0).powf(p.delta) - (s_star / gap) * (s_star / gap));
        raw.max(-2.0 * p.b).min(p.a_max)
    }

    fn layout() -> LaneLayout {
        LaneLayout { main_lanes: 3, lane_width: 3.5, speed_limit: 16.7, ramp: None }
    }

    fn path() -> ReferencePath {
        ReferencePath::new(&[[0.0, 0.0], [1000.0, 0.0]]).unwrap()
    }

    fn tracked(id: u32, s: f64, d: f64, v: f64, controlled: bool) -> TrackedVehicle {
        TrackedVehicle {
            id,
            controlled,
            state: FrenetState { s, s_dot: v, d, d_dot: 0.0 },
            geometry: VehicleGeometry::default(),
            follow: CarFollowingParams::default(),
        }
    }

    #[test]
    fn free_flow_equilibrium_and_launch() {
        let p = CarFollowingParams::default();
        let a = car_following_acceleration(p.v0, 0.0, f64::INFINITY, &p).unwrap();
        assert!(a.abs() < 1e-12);
        let a = car_following_acceleration(0.0, 0.0, f64::INFINITY, &p).unwrap();
        assert_eq!(a, p.a_max);
    }

    #[test]
    fn steady_state_spacing_matches_oracle() {
        let p = CarFollowingParams { v0: 1e9, ..Default::default() };
        let gap = p.s0 + 10.0 * p.t_h;
        // Desired gap equals the actual gap and the free-road term vanishes.
        let a = car_following_acceleration(10.0, 10.0, gap, &p).unwrap();
        assert!(a.abs() < 1e-9, "{a}");
        let a = car_following_acceleration(10.0, 10.0, 0.8 * gap, &p).unwrap();
        assert!((a + p.a_max * (1.0 / 0.64 - 1.0)).abs() < 1e-9, "{a}");
        let a = car_following_acceleration(10.0, 10.0, 0.25 * gap, &p).unwrap();
        assert_eq!(a, -p.max_brake());
        for (v, vl, g) in [(12.0, 8.0, 20.0), (3.0, 9.0, 4.0), (15.0, 15.0, 40.0), (16.0, 0.0, 6.0)] {
            let p = CarFollowingParams::default();
            let a = car_following_acceleration(v, vl, g, &p).unwrap();
            assert!((a - oracle(v, vl, g, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_gap_rejected() {
        let p = CarFollowingParams::default();
        assert!(matches!(
            car_following_acceleration(5.0, 5.0, 0.0, &p),
            Err(PredictionError::NonpositiveGap(_))
        ));
    }

    #[test]
    fn constant_speed_without_leader() {
        let snap = Snapshot {
            tick: 0,
            layout: layout(),
            delta_d: 1.75,
            vehicles: vec![tracked(1, 10.0, 3.5, 16.7, false)],
        };
        let t = predict_uncontrolled(&snap, &path(), 1, 30).unwrap();
        assert_eq!(t.samples.len(), 31);
        for (k, smp) in t.samples.iter().enumerate() {
            assert!((smp.v - 16.7).abs() < 1e-9);
            assert!((smp.x - (10.0 + 1.67 * k as f64)).abs() < 1e-9);
            assert_eq!(smp.y, 3.5);
        }
    }

    #[test]
    fn stopped_leader_brakes_follower() {
        let snap = Snapshot {
            tick: 0,
            layout: layout(),
            delta_d: 1.75,
            vehicles: vec![tracked(1, 0.0, 0.0, 6.0, false), tracked(2, 15.0, 0.0, 0.0, false)],
        };
        let t = predict_uncontrolled(&snap, &path(), 1, 100).unwrap();
        for w in t.samples.windows(2) {
            assert!(w[1].v <= w[0].v + 1e-12);
        }
        let gap = 15.0 - 5.0 - t.samples.last().unwrap().frenet.s;
        assert!(gap >= 1.0, "final gap {gap}");
        assert!(t.samples.last().unwrap().v < 1e-3);
    }

    #[test]
    fn peer_plan_reused_then_extended() {
        let snap = Snapshot {
            tick: 10,
            layout: layout(),
            delta_d: 1.75,
            vehicles: vec![tracked(1, 10.0, 0.0, 10.0, true)],
        };
        let plan: Vec<FrenetState> = (0..=30)
            .map(|k| FrenetState { s: k as f64, s_dot: 10.0, d: 0.0, d_dot: 0.0 })
            .collect();
        let p = PublishedPlan { start_tick: 10, states: &plan };
        let t = predict_controlled_peer(&snap, &path(), 1, Some(p), 30).unwrap();
        assert_eq!(t.samples.iter().map(|s| s.frenet).collect::<Vec<_>>(), plan);

        let p = PublishedPlan { start_tick: 0, states: &plan };
        let t = predict_controlled_peer(&snap, &path(), 1, Some(p), 30).unwrap();
        assert_eq!(t.samples[20].frenet.s, 30.0);
        assert!((t.samples[30].frenet.s - 40.0).abs() < 1e-9);
    }

    #[test]
    fn peer_without_plan_falls_back() {
        let snap = Snapshot {
            tick: 0,
            layout: layout(),
            delta_d: 1.75,
            vehicles: vec![tracked(1, 0.0, 0.0, 12.0, true), tracked(2, 30.0, 0.0, 8.0, false)],
        };
        let a = predict_controlled_peer(&snap, &path(), 1, None, 30).unwrap();
        let b = follow_in_lane(&snap, &path(), 0, 30).unwrap();
        assert_eq!(a, b);
    }
}
