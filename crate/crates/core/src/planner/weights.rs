use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PlannerError;

/// Weights of the trajectory cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightVector {
    /// Squared curvature.
    pub w_cur: f64,
    /// Squared heading deviation from the road.
    pub w_phi: f64,
    /// Squared offset from the lane center (lane keeping only).
    pub w_out: f64,
    /// Squared longitudinal acceleration.
    pub w_acc: f64,
    /// Squared longitudinal jerk.
    pub w_jerk: f64,
    /// Obstacle proximity.
    pub w_obs: f64,
}

impl WeightVector {
    pub fn aggressive() -> Self {
        Self { w_cur: 1.0, w_phi: 1.0, w_out: 6.5, w_acc: 1.0, w_jerk: 0.7, w_obs: 2.0 }
    }

    pub fn normal() -> Self {
        Self { w_cur: 1.0, w_phi: 1.0, w_out: 5.0, w_acc: 1.0, w_jerk: 1.0, w_obs: 4.0 }
    }

    pub fn conservative() -> Self {
        Self { w_cur: 1.0, w_phi: 1.0, w_out: 4.0, w_acc: 1.0, w_jerk: 1.2, w_obs: 6.0 }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            w_cur: self.w_cur * k,
            w_phi: self.w_phi * k,
            w_out: self.w_out * k,
            w_acc: self.w_acc * k,
            w_jerk: self.w_jerk * k,
            w_obs: self.w_obs * k,
        }
    }

    fn as_array(&self) -> [f64; 6] {
        [self.w_cur, self.w_phi, self.w_out, self.w_acc, self.w_jerk, self.w_obs]
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = self.as_array();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err("weights must be finite and nonnegative".into());
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err("at least one weight must be positive".into());
        }
        Ok(())
    }
}

/// Named weight vectors; vehicles refer to them by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightSet {
    pub vectors: BTreeMap<String, WeightVector>,
}

impl Default for WeightSet {
    /// The aggressive, normal and conservative driving habits.
    fn default() -> Self {
        let vectors = [
            ("aggressive", WeightVector::aggressive()),
            ("normal", WeightVector::normal()),
            ("conservative", WeightVector::conservative()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self { vectors }
    }
}

impl WeightSet {
    pub fn from_toml_str(src: &str) -> Result<Self, PlannerError> {
        let set: WeightSet = toml::from_str(src).map_err(|e| PlannerError::WeightSchema(e.message().to_string()))?;
        for (id, w) in &set.vectors {
            w.validate()
                .map_err(|m| PlannerError::WeightSchema(format!("{id}: {m}")))?;
        }
        if set.vectors.is_empty() {
            return Err(PlannerError::WeightSchema("weight set is empty".into()));
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, PlannerError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| PlannerError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("weight sets always serialize")
    }

    pub fn get(&self, id: &str) -> Result<&WeightVector, PlannerError> {
        self.vectors
            .get(id)
            .ok_or_else(|| PlannerError::UnknownWeights(id.to_string()))
    }
}
