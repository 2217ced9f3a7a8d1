use super::*;
use crate::model::{LaneLayout, Road};
use crate::prediction::PredictedSample;

fn road() -> Road {
    let layout = LaneLayout { main_lanes: 4, lane_width: 3.5, speed_limit: 16.7, ramp: None };
    Road::new(layout, &[[0.0, 0.0], [1000.0, 0.0]]).unwrap()
}

struct Fixture {
    road: Road,
    actions: ActionParams,
    safety: SafetyParams,
    config: PlannerConfig,
    weights: WeightVector,
}

impl Fixture {
    fn new() -> Self {
        Self {
            road: road(),
            actions: ActionParams::default(),
            safety: SafetyParams::default(),
            config: PlannerConfig::default(),
            weights: WeightVector::normal(),
        }
    }

    fn request<'a>(
        &'a self,
        start: KinematicState,
        segments: &'a [SegmentSpec],
        predictions: &'a [PredictedTrajectory],
    ) -> PlanRequest<'a> {
        PlanRequest {
            vehicle_id: 1,
            geometry: VehicleGeometry::default(),
            start_tick: 100,
            start,
            segments,
            weights: &self.weights,
            predictions,
            road: &self.road,
            actions: &self.actions,
            safety: &self.safety,
            config: &self.config,
        }
    }
}

fn cruising(s: f64, d: f64, v: f64) -> KinematicState {
    KinematicState { s, s_dot: v, d, ..Default::default() }
}

/// Constant-speed forecast along a fixed offset.
fn straight_forecast(id: u32, s0: f64, d: f64, v: f64, first_tick: u64, steps: usize) -> PredictedTrajectory {
    let samples = (0..=steps)
        .map(|k| {
            let s = s0 + v * k as f64 * 0.1;
            PredictedSample {
                tick: first_tick + k as u64,
                frenet: FrenetState { s, s_dot: v, d, d_dot: 0.0 },
                x: s,
                y: d,
                v,
                theta: 0.0,
            }
        })
        .collect();
    PredictedTrajectory { id, geometry: VehicleGeometry::default(), samples }
}

#[test]
fn schedule_covers_horizon() {
    let p = ActionParams::default();
    let seq = [Action::LCR, Action::LCR, Action::KS];
    let segs = schedule_segments(&seq, 0, 15, 30, 3.5, None, &p);
    assert_eq!(segs.iter().map(|s| s.ticks).collect::<Vec<_>>(), vec![15, 15]);
    assert_eq!(segs[1].origin_d, 3.5 + 1.75);

    let segs = schedule_segments(&seq, 10, 15, 30, 3.5, None, &p);
    assert_eq!(segs.iter().map(|s| s.ticks).collect::<Vec<_>>(), vec![5, 15, 15]);
    assert_eq!(segs[2].action, Action::KS);
    assert_eq!(segs[2].origin_d, 7.0);

    let segs = schedule_segments(&[Action::AC], 5, 15, 30, 0.0, None, &p);
    assert_eq!(segs.iter().map(|s| s.action).collect::<Vec<_>>(), vec![Action::AC, Action::KL, Action::KL]);
}

#[test]
fn keep_speed_plan_is_continuous_and_feasible() {
    let fx = Fixture::new();
    let segs = schedule_segments(&[Action::KS, Action::KS], 0, 15, 30, 3.5, None, &fx.actions);
    let traj = plan(&fx.request(cruising(50.0, 3.5, 12.0), &segs, &[])).unwrap();
    assert_eq!(traj.points.len(), 31);
    assert_eq!(traj.start_tick, 100);
    assert_eq!(traj.end_tick(), 130);
    for (k, p) in traj.points.iter().enumerate() {
        assert_eq!(p.tick, 100 + k as u64);
    }
    for w in traj.points.windows(2) {
        assert!(w[1].s > w[0].s);
        assert!((w[1].s_dot - w[0].s_dot).abs() < 0.5);
    }
    assert!(check_feasible(&traj.points, &VehicleGeometry::default(), &fx.road.layout, &fx.config.limits, &[]).is_ok());
    assert!(traj.points.iter().all(|p| (p.d - 3.5).abs() <= 0.2 + 1e-9));
}

#[test]
fn lane_change_pair_reaches_adjacent_lane() {
    let fx = Fixture::new();
    let segs = schedule_segments(&[Action::LCR, Action::LCR], 0, 15, 30, 3.5, None, &fx.actions);
    let traj = plan(&fx.request(cruising(50.0, 3.5, 14.0), &segs, &[])).unwrap();
    let mid = traj.at_tick(115).unwrap();
    assert!((mid.d - 5.25).abs() <= 0.3 + 1e-9, "{}", mid.d);
    let end = traj.points.last().unwrap();
    assert!((end.d - 7.0).abs() <= 0.3 + 1e-9, "{}", end.d);
    assert_eq!(traj.segments[1].nominal_d, 7.0);
}

/// Independent re-scoring of a candidate from its sampled points.
fn rescore(points: &[TrajectoryPoint], center: Option<f64>, obstacle: f64, w: &WeightVector) -> f64 {
    let pts = &points[1..];
    let sq = |f: &dyn Fn(&TrajectoryPoint) -> f64| pts.iter().map(|p| f(p).powi(2)).sum::<f64>();
    let out = center.map_or(0.0, |c| sq(&|p| p.d - c));
    w.w_cur * sq(&|p| p.kappa)
        + w.w_phi * sq(&|p| (p.d_dot / p.v).asin())
        + w.w_out * out
        + w.w_acc * sq(&|p| p.s_ddot)
        + w.w_jerk * sq(&|p| p.s_dddot)
        + w.w_obs * obstacle
}

#[test]
fn chosen_candidates_are_cheapest_feasible() {
    let fx = Fixture::new();
    let preds = [straight_forecast(7, 70.0, 7.0, 12.0, 100, 40), straight_forecast(8, 30.0, 3.5, 13.0, 100, 40)];
    let segs = schedule_segments(&[Action::KS, Action::AC, Action::KS], 0, 15, 30, 3.5, None, &fx.actions);
    let req = fx.request(cruising(50.0, 3.5, 12.0), &segs, &preds);
    let traj = plan(&req).unwrap();
    let mut state = req.start;
    let mut tick = req.start_tick;
    for (i, seg) in traj.segments.iter().enumerate() {
        let cands = evaluate_segment(&req, i, &state, tick).unwrap();
        assert_eq!(cands.len(), 15);
        let center = (!seg.action.is_lane_change()).then_some(seg.nominal_d);
        let mut best = f64::INFINITY;
        for c in &cands {
            let again = rescore(&c.points, center, c.breakdown.obstacle, &fx.weights);
            assert!((again - c.cost).abs() <= 1e-9 * again.abs().max(1.0));
            if c.verdict.is_ok() {
                best = best.min(again);
            }
        }
        assert!((seg.cost - best).abs() <= 1e-9 * best.max(1.0));
        let last = traj.at_tick(tick + seg.ticks as u64).unwrap();
        state = last.kinematic();
        tick = last.tick;
    }
}

#[test]
fn sharp_low_speed_change_violates_curvature() {
    let fx = Fixture::new();
    let sub = generate_subtrajectory(&cruising(50.0, 0.0, 5.0), 0, 5.0, 3.5, 8, 0.1, &fx.road.path).unwrap();
    let verdict = check_feasible(&sub.points, &VehicleGeometry::default(), &fx.road.layout, &fx.config.limits, &[]);
    assert!(matches!(verdict, Err(Infeasibility::Curvature { .. })), "{verdict:?}");
}

#[test]
fn hard_braking_violates_acceleration() {
    let fx = Fixture::new();
    let sub = generate_subtrajectory(&cruising(50.0, 0.0, 15.0), 0, 5.0, 0.0, 10, 0.1, &fx.road.path).unwrap();
    let verdict = check_feasible(&sub.points, &VehicleGeometry::default(), &fx.road.layout, &fx.config.limits, &[]);
    assert!(matches!(verdict, Err(Infeasibility::Acceleration { .. })), "{verdict:?}");
}

#[test]
fn stopped_obstacle_ahead_fails_first_segment() {
    let fx = Fixture::new();
    let preds = [straight_forecast(9, 75.0, 0.0, 0.0, 100, 40)];
    let segs = schedule_segments(&[Action::KS, Action::KS], 0, 15, 30, 0.0, None, &fx.actions);
    let err = plan(&fx.request(cruising(50.0, 0.0, 15.0), &segs, &preds)).unwrap_err();
    assert_eq!(err.segment, 0);
    assert!(matches!(
        err.reason,
        FailureReason::NoFeasibleCandidate { example: Infeasibility::Collision { other: 9, .. }, .. }
    ));
}

#[test]
fn failure_index_points_at_later_segment() {
    let fx = Fixture::new();
    // Clear for the first step, blocked once the stopped car is reached.
    let preds = [straight_forecast(9, 82.0, 0.0, 0.0, 100, 40)];
    let segs = schedule_segments(&[Action::KS, Action::KS], 0, 15, 30, 0.0, None, &fx.actions);
    let err = plan(&fx.request(cruising(50.0, 0.0, 15.0), &segs, &preds)).unwrap_err();
    assert_eq!(err.segment, 1, "{err}");
}

#[test]
fn left_change_from_leftmost_lane_has_empty_region() {
    let fx = Fixture::new();
    let segs = schedule_segments(&[Action::LCL], 0, 15, 30, 0.0, None, &fx.actions);
    let err = plan(&fx.request(cruising(50.0, 0.0, 12.0), &segs, &[])).unwrap_err();
    assert_eq!(err.segment, 0);
    assert!(matches!(err.reason, FailureReason::Region(PlannerError::RegionEmpty(_))));
}

#[test]
fn neighbour_raises_obstacle_cost() {
    let fx = Fixture::new();
    let sub = generate_subtrajectory(&cruising(50.0, 3.5, 12.0), 100, 12.0, 3.5, 15, 0.1, &fx.road.path).unwrap();
    let geom = VehicleGeometry::default();
    let beside = [straight_forecast(3, 52.0, 7.0, 12.0, 100, 20)];
    let far = [straight_forecast(3, 200.0, 7.0, 12.0, 100, 20)];
    let near = obstacle_cost(&sub.points, &geom, &beside, &fx.safety, 10.0);
    assert!(near > 0.0);
    assert_eq!(obstacle_cost(&sub.points, &geom, &far, &fx.safety, 10.0), 0.0);
}

#[test]
fn emergency_brakes_to_stop_in_lane() {
    let fx = Fixture::new();
    let start = KinematicState { s: 50.0, s_dot: 10.0, d: 4.0, ..Default::default() };
    let traj = emergency_trajectory(1, 20, &start, 3.5, 30, 4.0, &fx.road, 0.1).unwrap();
    assert!(traj.emergency);
    assert_eq!(traj.points.len(), 31);
    let at1 = traj.at_tick(30).unwrap();
    assert!((at1.s_dot - 6.0).abs() < 1e-12);
    let last = traj.points.last().unwrap();
    assert_eq!(last.s_dot, 0.0);
    assert!((last.s - (50.0 + 12.5)).abs() < 1e-9);
    assert!((last.d - 3.5).abs() < 1e-12);
    assert!(traj.points.windows(2).all(|w| w[1].s >= w[0].s));
}
