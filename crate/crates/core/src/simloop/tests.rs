use super::*;
use crate::model::LaneLayout;

fn scenario(vehicles: &str) -> Scenario {
    let src = format!(
        "id = \"t\"\n[road]\nlanes = 4\nlane_width = 3.5\ncenterline = [[0.0, 0.0], [1500.0, 0.0]]\n{vehicles}"
    );
    Scenario::from_toml_str(&src).unwrap()
}

const LONE_KEEP: &str = r#"
[[vehicles]]
id = 1
role = "controlled"
s0 = 50.0
lane0 = 1
v0 = 15.0
"#;

const LONE_CHANGE: &str = r#"
[[vehicles]]
id = 1
role = "controlled"
s0 = 50.0
lane0 = 1
v0 = 15.0
target_lane = 2
"#;

fn fast() -> SimConfig {
    SimConfig { mcts: MctsConfig { max_iterations: 400, ..Default::default() }, ..Default::default() }
}

#[test]
fn lone_lane_keep_finishes_immediately() {
    let sc = scenario(LONE_KEEP);
    let log = run(&sc, &WeightSet::default(), &fast()).unwrap();
    let m = compute_metrics(&log);
    assert!(m.success);
    assert_eq!(m.min_distance, None);
    assert_eq!(m.avg_finish_time, Some(0.0));
}

#[test]
fn lone_lane_change_completes_and_follows_plans() {
    let sc = scenario(LONE_CHANGE);
    let log = run(&sc, &WeightSet::default(), &fast()).unwrap();
    let m = compute_metrics(&log);
    assert!(m.success, "{:?}", log.termination);
    let t = m.avg_finish_time.unwrap();
    assert!(t > 0.0 && t < 30.0);
    // Between replans the executed state is the adopted plan's sample.
    for p in &log.plans {
        for (k, sample) in p.samples.iter().enumerate().take(6) {
            let Some(rec) = log.ticks.get((p.tick + k as u64) as usize) else { break };
            let later = log.plans.iter().any(|q| q.id == p.id && q.tick > p.tick && q.tick <= rec.tick);
            if later {
                break;
            }
            let v = &rec.vehicles[0];
            assert_eq!([v.s, v.d], [sample[0], sample[1]]);
        }
    }
}

#[test]
fn runs_are_replayable() {
    let sc = scenario(LONE_CHANGE);
    let cfg = SimConfig { seed: 9, ..fast() };
    let a = run(&sc, &WeightSet::default(), &cfg).unwrap();
    let b = run(&sc, &WeightSet::default(), &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.csv_string(), b.csv_string());
}

#[test]
fn decision_only_moves_linearly() {
    let sc = scenario(LONE_CHANGE);
    let cfg = SimConfig { mode: Mode::DecisionOnly, ..fast() };
    let log = run(&sc, &WeightSet::default(), &cfg).unwrap();
    let first = &log.decisions[0].sequences[0].actions[0];
    let rows: Vec<&VehicleRecord> = log.ticks.iter().take(16).map(|t| &t.vehicles[0]).collect();
    for w in rows.windows(2) {
        let dd = w[1].d - w[0].d;
        assert!((dd - first.lateral_sign() * 1.75 / 15.0).abs() < 1e-9, "{dd}");
        if *first == Action::KS || first.is_lane_change() {
            assert!((w[1].s - w[0].s - 1.5).abs() < 1e-9);
        }
    }
    assert!(compute_metrics(&log).success);
    assert_eq!(log.mode, Mode::DecisionOnly);
}

fn hand_log(second_d: f64, collision: bool) -> SimLog {
    let layout = LaneLayout { main_lanes: 2, lane_width: 3.5, speed_limit: 16.7, ramp: None };
    let entry = |id| RosterEntry {
        id,
        controlled: true,
        behavior: crate::model::Behavior::Normal,
        gamma: 0.5,
        weights_id: "normal".into(),
        target_lane: if id == 1 { 0 } else { 1 },
        length: 5.0,
        width: 2.0,
    };
    let rec = |id, d: f64| VehicleRecord { id, s: 10.0, d, x: 10.0, y: d, v: 10.0, theta: 0.0, lane: 0, action: Action::KS };
    SimLog {
        scenario_id: "hand".into(),
        seed: 0,
        mode: Mode::Full,
        tick: 0.1,
        max_duration: 30.0,
        layout,
        roster: vec![entry(1), entry(2)],
        ticks: vec![TickRecord { tick: 0, vehicles: vec![rec(1, 0.0), rec(2, second_d)] }],
        decisions: Vec::new(),
        plans: Vec::new(),
        plan_events: Vec::new(),
        collision: collision.then_some(CollisionRecord { tick: 0, a: 1, b: 2 }),
        termination: if collision { Termination::Collision } else { Termination::Completed },
    }
}

#[test]
fn parallel_bodies_distance_is_lateral_gap() {
    let m = compute_metrics(&hand_log(3.5, false));
    assert!((m.min_distance.unwrap() - 1.5).abs() < 1e-12);
    assert!(m.success);
}

#[test]
fn collision_log_is_not_success() {
    let m = compute_metrics(&hand_log(1.0, true));
    assert!(!m.success && m.collision);
}

#[test]
fn log_and_metrics_round_trip() {
    let log = hand_log(3.5, false);
    assert_eq!(SimLog::from_json(&log.to_json()).unwrap(), log);
    let m = compute_metrics(&log);
    assert_eq!(Metrics::from_json(&m.to_json()).unwrap(), m);
    let agg = aggregate(&[m.clone(), Metrics { success: false, ..m }]);
    assert_eq!(agg.success_rate, 0.5);
    assert_eq!(Aggregate::from_json(&agg.to_json()).unwrap(), agg);
}
