use serde::{Deserialize, Serialize};

use super::log::{PlanEventKind, SimLog, Termination};
use super::Mode;
use crate::geometry::OrientedRect;
use crate::model::LaneLayout;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinishTime {
    pub id: u32,
    /// Start of the final uninterrupted stretch inside the target lane, if
    /// the vehicle ends the log there.
    pub time: Option<f64>,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario_id: String,
    pub seed: u64,
    pub mode: Mode,
    pub success: bool,
    pub collision: bool,
    pub searches: usize,
    pub avg_expanded_nodes: f64,
    /// Mean finish time over controlled vehicles; absent for failed runs.
    pub avg_finish_time: Option<f64>,
    /// Smallest body-to-body distance; absent with fewer than two vehicles.
    pub min_distance: Option<f64>,
    pub finish_times: Vec<FinishTime>,
    pub aborts: usize,
    pub duration: f64,
}

impl Metrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics always serialize")
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }
}

/// Whether a body of width `width` at offset `d` lies inside `lane`.
pub fn in_lane(layout: &LaneLayout, d: f64, width: f64, lane: usize) -> bool {
    layout.body_in_lane(d, width, lane)
}

pub fn compute_metrics(log: &SimLog) -> Metrics {
    let mut finish_times = Vec::new();
    for (idx, v) in log.roster.iter().enumerate().filter(|(_, v)| v.controlled) {
        let mut since: Option<u64> = None;
        for t in &log.ticks {
            let Some(r) = t.vehicles.get(idx).filter(|r| r.id == v.id) else { continue };
            if in_lane(&log.layout, r.d, v.width, v.target_lane) {
                since.get_or_insert(t.tick);
            } else {
                since = None;
            }
        }
        finish_times.push(FinishTime { id: v.id, time: since.map(|k| k as f64 * log.tick) });
    }

    let mut min_distance: Option<f64> = None;
    for t in &log.ticks {
        let rects: Vec<OrientedRect> = t
            .vehicles
            .iter()
            .zip(&log.roster)
            .map(|(r, g)| OrientedRect::new(r.x, r.y, r.theta, g.length, g.width))
            .collect();
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                let dist = rects[i].distance(&rects[j]);
                min_distance = Some(min_distance.map_or(dist, |m| m.min(dist)));
            }
        }
    }

    let collision = log.collision.is_some();
    let all_done = finish_times.iter().all(|f| f.time.is_some());
    let success = !collision && all_done && log.termination == Termination::Completed;
    let avg_finish_time = success.then(|| {
        let n = finish_times.len().max(1) as f64;
        finish_times.iter().filter_map(|f| f.time).sum::<f64>() / n
    });
    let searches = log.decisions.len();
    let avg_expanded_nodes = if searches == 0 {
        0.0
    } else {
        log.decisions.iter().map(|d| d.expanded_nodes as f64).sum::<f64>() / searches as f64
    };
    Metrics {
        scenario_id: log.scenario_id.clone(),
        seed: log.seed,
        mode: log.mode,
        success,
        collision,
        searches,
        avg_expanded_nodes,
        avg_finish_time,
        min_distance,
        finish_times,
        aborts: log
            .plan_events
            .iter()
            .filter(|e| e.kind == PlanEventKind::Abort)
            .count(),
        duration: log.duration(),
    }
}

/// Summary over several seeds of one scenario and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario_id: String,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub runs: usize,
    pub successes: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub avg_expanded_nodes: f64,
    /// Mean over successful runs only.
    pub avg_finish_time: Option<f64>,
    /// Mean of the per-run minimum distances.
    pub avg_min_distance: Option<f64>,
    /// Smallest per-run minimum distance.
    pub min_distance: Option<f64>,
}

impl Aggregate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("aggregates always serialize")
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(runs: &[Metrics]) -> Aggregate {
    let successes = runs.iter().filter(|m| m.success).count();
    let first = runs.first();
    Aggregate {
        scenario_id: first.map(|m| m.scenario_id.clone()).unwrap_or_default(),
        mode: first.map_or(Mode::Full, |m| m.mode),
        seeds: runs.iter().map(|m| m.seed).collect(),
        runs: runs.len(),
        successes,
        failures: runs.len() - successes,
        success_rate: if runs.is_empty() { 0.0 } else { successes as f64 / runs.len() as f64 },
        avg_expanded_nodes: mean(runs.iter().map(|m| m.avg_expanded_nodes)).unwrap_or(0.0),
        avg_finish_time: mean(runs.iter().filter_map(|m| m.avg_finish_time)),
        avg_min_distance: mean(runs.iter().filter_map(|m| m.min_distance)),
        min_distance: runs.iter().filter_map(|m| m.min_distance).reduce(f64::min),
    }
}
