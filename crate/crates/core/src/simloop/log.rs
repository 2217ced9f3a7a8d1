use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Mode;
use crate::decision::VehicleSequence;
use crate::model::{Action, Behavior, LaneLayout};

/// Static description of one vehicle, enough to recompute metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: u32,
    pub controlled: bool,
    pub behavior: Behavior,
    pub gamma: f64,
    pub weights_id: String,
    pub target_lane: usize,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub id: u32,
    pub s: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub lane: usize,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub vehicles: Vec<VehicleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub tick: u64,
    pub sequences: Vec<VehicleSequence>,
    pub expanded_nodes: usize,
    pub root_combinations: usize,
    pub emergency: bool,
}

/// A trajectory adopted at a replanning tick, as `(s, d, v)` per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub tick: u64,
    pub id: u32,
    pub emergency: bool,
    pub actions: Vec<Action>,
    pub cost: f64,
    pub samples: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanEventKind {
    /// Every candidate of a segment was infeasible.
    Failure { segment: usize, action: Action, reason: String },
    /// The remaining sequence was replaced by decelerate-then-keep.
    Abort,
    /// The replacement also failed; braking in lane.
    Emergency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent {
    pub tick: u64,
    pub id: u32,
    #[serde(flatten)]
    pub kind: PlanEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub tick: u64,
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Collision,
    Timeout,
}

/// Complete record of one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLog {
    pub scenario_id: String,
    pub seed: u64,
    pub mode: Mode,
    pub tick: f64,
    pub max_duration: f64,
    pub layout: LaneLayout,
    pub roster: Vec<RosterEntry>,
    pub ticks: Vec<TickRecord>,
    pub decisions: Vec<DecisionRecord>,
    pub plans: Vec<PlanRecord>,
    pub plan_events: Vec<PlanEvent>,
    pub collision: Option<CollisionRecord>,
    pub termination: Termination,
}

impl SimLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("logs always serialize")
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }

    /// Simulated time covered by the log (s).
    pub fn duration(&self) -> f64 {
        self.ticks.last().map_or(0.0, |t| t.tick as f64 * self.tick)
    }

    /// Per-tick CSV: `tick,id,x,y,v,theta,lane,action`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "tick,id,x,y,v,theta,lane,action")?;
        for t in &self.ticks {
            for r in &t.vehicles {
                writeln!(
                    w,
                    "{},{},{:.4},{:.4},{:.4},{:.6},{},{}",
                    t.tick, r.id, r.x, r.y, r.v, r.theta, r.lane, r.action
                )?;
            }
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}
