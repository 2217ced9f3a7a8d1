use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ActionParams, DecisionState, ModelError, SafetyParams, VehicleGeometry};
use crate::geometry::{OrientedRect, ReferencePath};

pub const DEFAULT_SPEED_LIMIT: f64 = 16.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Controlled,
    Uncontrolled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behavior {
    Aggressive,
    Normal,
    Conservative,
}

impl Behavior {
    pub fn default_gamma(self) -> f64 {
        match self {
            Behavior::Aggressive => 0.1,
            Behavior::Normal => 0.5,
            Behavior::Conservative => 0.9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Behavior::Aggressive => "aggressive",
            Behavior::Normal => "normal",
            Behavior::Conservative => "conservative",
        }
    }
}

/// Desired-speed override applied to an uncontrolled vehicle from time `t` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub t: f64,
    pub desired_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_accel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampDoc {
    pub merge_lane: usize,
    pub merge_end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadDoc {
    pub lanes: usize,
    pub lane_width: f64,
    #[serde(default = "default_speed_limit")]
    pub speed_limit: f64,
    /// Centerline of lane 0 (leftmost); further lanes are offset by
    /// `lane_width` towards +d.
    pub centerline: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampDoc>,
}

fn default_speed_limit() -> f64 {
    DEFAULT_SPEED_LIMIT
}

fn default_length() -> f64 {
    5.0
}

fn default_width() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleDoc {
    pub id: u32,
    pub role: Role,
    #[serde(default = "default_behavior")]
    pub behavior: Behavior,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_id: Option<String>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    pub s0: f64,
    pub lane0: usize,
    pub v0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_lane: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub script: Vec<ScriptEntry>,
}

fn default_behavior() -> Behavior {
    Behavior::Normal
}

/// Seeded perturbation of initial positions and speeds, uniform in `±s`, `±v`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterDoc {
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub v: f64,
}

/// On-disk scenario document (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub id: String,
    pub road: RoadDoc,
    #[serde(default)]
    pub safety: SafetyParams,
    #[serde(default)]
    pub actions: ActionParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterDoc>,
    pub vehicles: Vec<VehicleDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub lane: usize,
    pub merge_end_s: f64,
}

/// Lane bookkeeping in the frame of lane 0's centerline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneLayout {
    pub main_lanes: usize,
    pub lane_width: f64,
    pub speed_limit: f64,
    pub ramp: Option<Ramp>,
}

/// Up to two lanes occupied by one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occupancy {
    pub primary: usize,
    pub secondary: Option<usize>,
}

impl Occupancy {
    pub fn contains(&self, lane: usize) -> bool {
        self.primary == lane || self.secondary == Some(lane)
    }

    pub fn intersects(&self, other: &Occupancy) -> bool {
        other.contains(self.primary) || self.secondary.is_some_and(|l| other.contains(l))
    }

    pub fn lanes(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.primary).chain(self.secondary)
    }

    /// Occupies exactly `lane` and nothing else.
    pub fn is_only(&self, lane: usize) -> bool {
        self.primary == lane && self.secondary.is_none()
    }
}

impl LaneLayout {
    pub fn total_lanes(&self) -> usize {
        self.main_lanes + usize::from(self.ramp.is_some())
    }

    pub fn lane_center(&self, lane: usize) -> f64 {
        lane as f64 * self.lane_width
    }

    pub fn is_ramp_lane(&self, lane: usize) -> bool {
        self.ramp.is_some_and(|r| r.lane == lane)
    }

    /// Nearest lane center to `d`, ties going to the lane farther from lane 0.
    pub fn nearest_lane(&self, d: f64) -> usize {
        let k = (d / self.lane_width).round();
        k.clamp(0.0, (self.total_lanes() - 1) as f64) as usize
    }

    /// Lanes a vehicle at offset `d` occupies: the nearest lane, plus the
    /// neighbour it leans towards once it is more than `delta_d / 2` off
    /// center.
    pub fn occupancy(&self, d: f64, delta_d: f64) -> Occupancy {
        let primary = self.nearest_lane(d);
        let off = d - self.lane_center(primary);
        let secondary = if off.abs() > 0.5 * delta_d + 1e-9 {
            let n = primary as i64 + off.signum() as i64;
            (n >= 0 && (n as usize) < self.total_lanes()).then_some(n as usize)
        } else {
            None
        };
        Occupancy { primary, secondary }
    }

    /// Lateral road edges (offsets of the outer lane boundaries) at `s`.
    pub fn lateral_bounds(&self, s: f64) -> (f64, f64) {
        let half = 0.5 * self.lane_width;
        let last = match self.ramp {
            Some(r) if s <= r.merge_end_s => r.lane,
            _ => self.main_lanes - 1,
        };
        (-half, self.lane_center(last) + half)
    }

    /// Whether a body of width `width` centred at `d` lies entirely inside `lane`.
    pub fn body_in_lane(&self, d: f64, width: f64, lane: usize) -> bool {
        (d - self.lane_center(lane)).abs() + 0.5 * width <= 0.5 * self.lane_width + 1e-9
    }
}

/// Road geometry: lane layout plus the lane-0 centerline all offsets refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub layout: LaneLayout,
    pub path: ReferencePath,
    pub lane_paths: Vec<ReferencePath>,
}

impl std::ops::Deref for Road {
    type Target = LaneLayout;

    fn deref(&self) -> &LaneLayout {
        &self.layout
    }
}

impl Road {
    /// Road whose lane 0 follows `centerline`.
    pub fn new(layout: LaneLayout, centerline: &[[f64; 2]]) -> Result<Self, ModelError> {
        let path = ReferencePath::new(centerline)
            .map_err(|e| invariant(format!("road.centerline: {e}")))?;
        Self::from_path(layout, path)
    }

    fn from_path(layout: LaneLayout, path: ReferencePath) -> Result<Self, ModelError> {
        let mut lane_paths = Vec::with_capacity(layout.total_lanes());
        lane_paths.push(path.clone());
        for k in 1..layout.total_lanes() {
            lane_paths.push(
                path.offset(layout.lane_center(k))
                    .map_err(|e| invariant(format!("lane {k} geometry: {e}")))?,
            );
        }
        Ok(Self { layout, path, lane_paths })
    }

    /// Cartesian pose of a body at `(s, d)`; heading follows the road.
    pub fn footprint(&self, s: f64, d: f64, geom: &VehicleGeometry) -> OrientedRect {
        let s = s.clamp(0.0, self.path.length());
        let (x, y, theta, _) = self.path.interpolate(s);
        OrientedRect::new(x - d * theta.sin(), y + d * theta.cos(), theta, geom.length, geom.width)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSpec {
    pub id: u32,
    pub role: Role,
    pub behavior: Behavior,
    pub gamma: f64,
    pub weights_id: String,
    pub geometry: VehicleGeometry,
    pub initial: DecisionState,
    pub lane0: usize,
    /// `None` keeps the initial lane.
    pub target_lane: Option<usize>,
    pub script: Vec<ScriptEntry>,
}

impl VehicleSpec {
    pub fn is_controlled(&self) -> bool {
        self.role == Role::Controlled
    }

    pub fn intended_lane(&self) -> usize {
        self.target_lane.unwrap_or(self.lane0)
    }
}

/// Validated scenario with constructed lane geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub road: Road,
    pub vehicles: Vec<VehicleSpec>,
}

fn invariant(msg: impl Into<String>) -> ModelError {
    ModelError::InvariantViolation(msg.into())
}

impl Scenario {
    pub fn from_toml_str(src: &str) -> Result<Self, ModelError> {
        let doc: ScenarioDoc = toml::from_str(src).map_err(|e| ModelError::Schema {
            path: e
                .span()
                .map(|sp| format!("byte {}..{}", sp.start, sp.end))
                .unwrap_or_default(),
            message: e.message().to_string(),
        })?;
        Self::from_doc(doc)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&src).map_err(|e| match e {
            ModelError::Schema { path: p, message } => ModelError::Schema {
                path: format!("{} {p}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.doc).expect("scenario documents always serialize")
    }

    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ModelError> {
        let r = &doc.road;
        if r.lanes == 0 {
            return Err(invariant("road.lanes must be at least 1"));
        }
        if !(r.lane_width > 0.0) {
            return Err(invariant("road.lane_width must be positive"));
        }
        if !(r.speed_limit > 0.0) {
            return Err(invariant("road.speed_limit must be positive"));
        }
        let s = &doc.safety;
        if !(s.tau > 0.0 && s.mth > 0.0) {
            return Err(invariant("safety.tau and safety.mth must be positive"));
        }
        let a = &doc.actions;
        if !(a.a_acc > 0.0 && a.a_dec > 0.0 && a.dt > 0.0) {
            return Err(invariant("actions.a_acc, a_dec and dt_decision must be positive"));
        }
        if !(a.delta_d > 0.0 && a.delta_d <= r.lane_width) {
            return Err(invariant("actions.delta_d must lie in (0, lane_width]"));
        }

        let path = ReferencePath::new(&r.centerline)
            .map_err(|e| invariant(format!("road.centerline: {e}")))?;
        let ramp = match &r.ramp {
            None => None,
            Some(rd) => {
                if rd.merge_lane != r.lanes {
                    return Err(invariant(format!(
                        "road.ramp.merge_lane must be {} (right of the main lanes)",
                        r.lanes
                    )));
                }
                if !(rd.merge_end_s > 0.0 && rd.merge_end_s < path.length()) {
                    return Err(invariant("road.ramp.merge_end_s must lie inside the road"));
                }
                Some(Ramp { lane: rd.merge_lane, merge_end_s: rd.merge_end_s })
            }
        };
        let layout = LaneLayout {
            main_lanes: r.lanes,
            lane_width: r.lane_width,
            speed_limit: r.speed_limit,
            ramp,
        };
        let road = Road::from_path(layout, path)?;
        let total = road.total_lanes();

        let mut ids = BTreeSet::new();
        let mut vehicles = Vec::with_capacity(doc.vehicles.len());
        for (i, v) in doc.vehicles.iter().enumerate() {
            let at = |m: &str| invariant(format!("vehicles[{i}] (id {}): {m}", v.id));
            if !ids.insert(v.id) {
                return Err(at("duplicate vehicle id"));
            }
            if !(v.length > 0.0 && v.width > 0.0) {
                return Err(at("length and width must be positive"));
            }
            let gamma = v.gamma.unwrap_or_else(|| v.behavior.default_gamma());
            if !(0.0..=1.0).contains(&gamma) {
                return Err(at("gamma must lie in [0, 1]"));
            }
            if v.lane0 >= total {
                return Err(at("lane0 does not exist"));
            }
            if !(v.s0 >= 0.0 && v.s0 <= road.path.length()) {
                return Err(at("s0 lies off the road"));
            }
            if !(v.v0 >= 0.0 && v.v0.is_finite()) {
                return Err(at("v0 must be a nonnegative speed"));
            }
            if road.is_ramp_lane(v.lane0) && v.s0 >= road.ramp.unwrap().merge_end_s {
                return Err(at("starts on the ramp past its merge end"));
            }
            if let Some(t) = v.target_lane {
                if v.role == Role::Uncontrolled {
                    return Err(at("uncontrolled vehicles keep their lane; target_lane not allowed"));
                }
                if t >= r.lanes {
                    return Err(at("target_lane must be a main-road lane"));
                }
            } else if road.is_ramp_lane(v.lane0) {
                return Err(at("a vehicle on the ramp needs a main-road target_lane"));
            }
            if !v.script.is_empty() && v.role == Role::Controlled {
                return Err(at("scripts apply to uncontrolled vehicles only"));
            }
            vehicles.push(VehicleSpec {
                id: v.id,
                role: v.role,
                behavior: v.behavior,
                gamma,
                weights_id: v
                    .weights_id
                    .clone()
                    .unwrap_or_else(|| v.behavior.name().to_string()),
                geometry: VehicleGeometry { length: v.length, width: v.width },
                initial: DecisionState {
                    s: v.s0,
                    d: road.lane_center(v.lane0),
                    v: v.v0,
                },
                lane0: v.lane0,
                target_lane: v.target_lane,
                script: v.script.clone(),
            });
        }
        for i in 0..vehicles.len() {
            for j in i + 1..vehicles.len() {
                let (a, b) = (&vehicles[i], &vehicles[j]);
                let ra = road.footprint(a.initial.s, a.initial.d, &a.geometry);
                let rb = road.footprint(b.initial.s, b.initial.d, &b.geometry);
                if ra.overlaps(&rb) {
                    return Err(invariant(format!(
                        "vehicles {} and {} overlap initially",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(Self { doc, road, vehicles })
    }

    pub fn id(&self) -> &str {
        &self.doc.id
    }

    pub fn safety(&self) -> SafetyParams {
        self.doc.safety
    }

    pub fn actions(&self) -> ActionParams {
        self.doc.actions
    }

    pub fn vehicle(&self, id: u32) -> Option<&VehicleSpec> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn controlled(&self) -> impl Iterator<Item = &VehicleSpec> {
        self.vehicles.iter().filter(|v| v.is_controlled())
    }
}
