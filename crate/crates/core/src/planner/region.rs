use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::model::{Action, ActionParams};

/// Sampling half-widths around the nominal end state of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMargins {
    /// End-speed half-width for action segments (m/s).
    pub speed: f64,
    /// End-speed half-width for lane-keeping segments (m/s).
    pub lane_keep_speed: f64,
    /// Lateral half-width for KS, AC and DC (m).
    pub keep: f64,
    /// Lateral half-width for lane changes (m).
    pub change: f64,
    /// Lateral half-width for lane-keeping segments (m).
    pub lane_keep: f64,
}

impl Default for RegionMargins {
    fn default() -> Self {
        Self { speed: 0.5, lane_keep_speed: 1.5, keep: 0.2, change: 0.3, lane_keep: 0.4 }
    }
}

/// Where a segment starts and what it may end in laterally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneContext {
    /// Nominal lateral offset at the start of the decision step the segment
    /// belongs to.
    pub origin_d: f64,
    /// Admissible range of the body center's lateral offset.
    pub d_bounds: (f64, f64),
    pub max_speed: f64,
}

impl LaneContext {
    /// Nominal lateral offset at the end of the step for `action`.
    pub fn nominal_end(&self, action: Action, params: &ActionParams) -> f64 {
        self.origin_d + action.lateral_sign() * params.delta_d
    }
}

/// Box of end states sampled for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetStateRegion {
    pub speed: (f64, f64),
    pub offset: (f64, f64),
    pub duration: f64,
    pub speed_samples: usize,
    pub offset_samples: usize,
}

/// End-state region for `action` lasting `duration`. Speed targets are
/// measured from `base.0`, the speed `base.1` seconds before the segment end.
pub fn target_region_for(
    action: Action,
    base: (f64, f64),
    duration: f64,
    lane: &LaneContext,
    params: &ActionParams,
    margins: &RegionMargins,
    samples: (usize, usize),
) -> Result<TargetStateRegion, PlannerError> {
    if !(duration > 0.0) {
        return Err(PlannerError::RegionEmpty(format!("duration {duration}")));
    }
    let (v, span) = base;
    let (v_mid, v_half, d_half) = match action {
        Action::KS | Action::LCL | Action::LCR => (v, margins.speed, margins.keep),
        Action::AC => (v + params.a_acc * span, margins.speed, margins.keep),
        Action::DC => (v - params.a_dec * span, margins.speed, margins.keep),
        Action::KL => (v, margins.lane_keep_speed, margins.lane_keep),
    };
    let d_half = if action.is_lane_change() { margins.change } else { d_half };
    let d_mid = lane.nominal_end(action, params);
    let speed = ((v_mid - v_half).max(0.0), (v_mid + v_half).min(lane.max_speed));
    let offset = ((d_mid - d_half).max(lane.d_bounds.0), (d_mid + d_half).min(lane.d_bounds.1));
    if speed.0 > speed.1 {
        return Err(PlannerError::RegionEmpty(format!(
            "{action} end speed [{:.3}, {:.3}]",
            speed.0, speed.1
        )));
    }
    if offset.0 > offset.1 {
        return Err(PlannerError::RegionEmpty(format!(
            "{action} end offset [{:.3}, {:.3}]",
            offset.0, offset.1
        )));
    }
    Ok(TargetStateRegion {
        speed,
        offset,
        duration,
        speed_samples: samples.0.max(1),
        offset_samples: samples.1.max(1),
    })
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// Uniform grid of `(end speed, end offset)` pairs, speeds outermost.
pub fn sample_targets(region: &TargetStateRegion) -> Vec<(f64, f64)> {
    grid(region.speed.0, region.speed.1, region.speed_samples)
        .flat_map(|v| grid(region.offset.0, region.offset.1, region.offset_samples).map(move |d| (v, d)))
        .collect()
}
