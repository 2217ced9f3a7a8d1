//! Fixtures, batch runners and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{Matrix6, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mvplan::decision::{DecisionProblem, FlowState, FlowVehicle, JointAction};
use mvplan::model::{
    Action, ActionParams, DecisionState, LaneLayout, Ramp, SafetyParams, Scenario, VehicleGeometry,
};
use mvplan::planner::WeightSet;
use mvplan::prediction::CarFollowingParams;
use mvplan::simloop::{compute_metrics, run, Metrics, Mode, SimConfig, SimLog};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> Scenario {
    Scenario::load(&fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub struct Run {
    pub log: SimLog,
    pub metrics: Metrics,
    pub wall: Duration,
}

pub fn config(mode: Mode, seed: u64) -> SimConfig {
    SimConfig { mode, seed, ..SimConfig::default() }
}

/// Runs `name` once per seed, in parallel, with the default configuration.
pub fn run_seeds(name: &str, mode: Mode, seeds: std::ops::Range<u64>) -> Vec<Run> {
    let sc = fixture(name);
    let weights = WeightSet::default();
    let seeds: Vec<u64> = seeds.collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let t = Instant::now();
            let log = run(&sc, &weights, &config(mode, seed)).unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
            let wall = t.elapsed();
            let metrics = compute_metrics(&log);
            Run { log, metrics, wall }
        })
        .collect()
}

/// Cooperative flow reward evaluated term by term.
pub fn flow_reward_oracle(r: &[f64], g: &[f64]) -> f64 {
    let k = r.len();
    let total: f64 = r.iter().sum();
    let mut acc = 0.0;
    for i in 0..k {
        let others = total - r[i];
        acc += (r[i] + g[i] * others) / (1.0 + (k as f64 - 1.0) * g[i]);
    }
    acc / k as f64
}

/// Quintic coefficients from the 6x6 boundary system, solved by LU.
pub fn quintic_oracle(p0: [f64; 3], p1: [f64; 3], t: f64) -> [f64; 6] {
    let row = |t: f64| -> [[f64; 6]; 3] {
        [
            [1.0, t, t * t, t.powi(3), t.powi(4), t.powi(5)],
            [0.0, 1.0, 2.0 * t, 3.0 * t * t, 4.0 * t.powi(3), 5.0 * t.powi(4)],
            [0.0, 0.0, 2.0, 6.0 * t, 12.0 * t * t, 20.0 * t.powi(3)],
        ]
    };
    let (a, b) = (row(0.0), row(t));
    let m = Matrix6::from_fn(|i, j| if i < 3 { a[i][j] } else { b[i - 3][j] });
    let rhs = Vector6::new(p0[0], p0[1], p0[2], p1[0], p1[1], p1[2]);
    let x = m.lu().solve(&rhs).expect("boundary system is regular for t > 0");
    [x[0], x[1], x[2], x[3], x[4], x[5]]
}

/// Every one of the 5^K controlled-action products that passes the joint rule.
pub fn brute_force_combinations(problem: &DecisionProblem, flow: &FlowState) -> Vec<JointAction> {
    let k = problem.controlled().len();
    let n = Action::CONTROLLED.len();
    let mut out = Vec::new();
    for code in 0..n.pow(k as u32) {
        let mut c = code;
        let mut acts = vec![Action::KS; k];
        for slot in acts.iter_mut().rev() {
            *slot = Action::CONTROLLED[c % n];
            c /= n;
        }
        if problem.joint_admissible(flow, &acts) {
            out.push(JointAction(acts));
        }
    }
    out
}

/// A random decision problem with one to three controlled vehicles and up to
/// two uncontrolled ones, packed into a short stretch of road so that the
/// pairwise rules bite.
pub fn random_problem(rng: &mut ChaCha8Rng) -> (DecisionProblem, FlowState) {
    let main_lanes = rng.gen_range(2..=4);
    let ramp = rng.gen_bool(0.3).then(|| Ramp { lane: main_lanes, merge_end_s: rng.gen_range(40.0..120.0) });
    let layout = LaneLayout { main_lanes, lane_width: 3.5, speed_limit: 16.7, ramp };
    let lanes = layout.total_lanes();
    let params = ActionParams::default();
    let n_ctrl = rng.gen_range(1..=3);
    let n_unc = rng.gen_range(0..=2);
    let mut vehicles = Vec::new();
    let mut states = Vec::new();
    let mut last = Vec::new();
    for i in 0..n_ctrl + n_unc {
        let controlled = i < n_ctrl;
        let lane = rng.gen_range(0..lanes);
        let half = if controlled && rng.gen_bool(0.25) { params.delta_d } else { 0.0 };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let d = (layout.lane_center(lane) + sign * half).clamp(0.0, layout.lane_center(lanes - 1));
        let target_lane = if controlled { rng.gen_range(0..main_lanes) } else { lane };
        vehicles.push(FlowVehicle {
            id: i as u32 + 1,
            controlled,
            geometry: VehicleGeometry::default(),
            gamma: rng.gen_range(0.0..=1.0),
            target_lane,
            follow: CarFollowingParams::default(),
        });
        states.push(DecisionState { s: rng.gen_range(0.0..60.0), d, v: rng.gen_range(4.0..16.7) });
        last.push(if controlled && rng.gen_bool(0.5) {
            Some(Action::CONTROLLED[rng.gen_range(0..Action::CONTROLLED.len())])
        } else {
            None
        });
    }
    let problem = DecisionProblem::new(layout, params, SafetyParams::default(), vehicles).expect("valid roster");
    (problem, FlowState::new(&states, &last))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
