use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Position, velocity and acceleration on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryState {
    pub p: f64,
    pub v: f64,
    pub a: f64,
}

impl BoundaryState {
    pub fn new(p: f64, v: f64, a: f64) -> Self {
        Self { p, v, a }
    }
}

/// `p(t) = c0 + c1 t + ... + c5 t^5` on `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticPolynomial {
    pub coeffs: [f64; 6],
    pub duration: f64,
}

impl QuinticPolynomial {
    /// Unique quintic meeting position, velocity and acceleration at both ends.
    pub fn fit(
        start: BoundaryState,
        end: BoundaryState,
        duration: f64,
    ) -> Result<Self, GeometryError> {
        if !(duration > 0.0) {
            return Err(GeometryError::NonpositiveDuration(duration));
        }
        let t = duration;
        let (t2, t3) = (t * t, t * t * t);
        let c0 = start.p;
        let c1 = start.v;
        let c2 = 0.5 * start.a;
        let dp = end.p - (c0 + c1 * t + c2 * t2);
        let dv = end.v - (c1 + 2.0 * c2 * t);
        let da = end.a - 2.0 * c2;
        let c3 = (10.0 * dp - 4.0 * dv * t + 0.5 * da * t2) / t3;
        let c4 = (-15.0 * dp + 7.0 * dv * t - da * t2) / (t3 * t);
        let c5 = (6.0 * dp - 3.0 * dv * t + 0.5 * da * t2) / (t3 * t2);
        Ok(Self {
            coeffs: [c0, c1, c2, c3, c4, c5],
            duration,
        })
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> Result<[f64; 4], GeometryError> {
        if !(t >= -1e-9 && t <= self.duration + 1e-9) {
            return Err(GeometryError::OutOfRange {
                value: t,
                lo: 0.0,
                hi: self.duration,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> [f64; 4] {
        let c = &self.coeffs;
        let p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let v = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let a = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        let j = 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]);
        [p, v, a, j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_jerk_step_coefficients() {
        let q = QuinticPolynomial::fit(
            BoundaryState::new(0.0, 0.0, 0.0),
            BoundaryState::new(1.0, 0.0, 0.0),
            1.0,
        )
        .unwrap();
        let expect = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
        for (c, e) in q.coeffs.iter().zip(expect) {
            assert!((c - e).abs() < 1e-9);
        }
        assert!((q.eval(0.5).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stationary_boundary_is_constant() {
        let q = QuinticPolynomial::fit(
            BoundaryState::new(3.0, 0.0, 0.0),
            BoundaryState::new(3.0, 0.0, 0.0),
            2.0,
        )
        .unwrap();
        assert_eq!(q.coeffs, [3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn start_boundary_reproduced_at_zero() {
        let start = BoundaryState::new(1.5, -2.0, 0.7);
        let q = QuinticPolynomial::fit(start, BoundaryState::new(9.0, 3.0, -1.0), 2.5).unwrap();
        let [p, v, a, _] = q.eval(0.0).unwrap();
        assert_eq!((p, v, a), (1.5, -2.0, 0.7));
    }

    #[test]
    fn rejects_nonpositive_duration() {
        let b = BoundaryState::default();
        assert!(matches!(
            QuinticPolynomial::fit(b, b, 0.0),
            Err(GeometryError::NonpositiveDuration(_))
        ));
        assert!(QuinticPolynomial::fit(b, b, -1.0).is_err());
    }

    #[test]
    fn eval_outside_duration_errors() {
        let b = BoundaryState::default();
        let q = QuinticPolynomial::fit(b, b, 1.0).unwrap();
        assert!(q.eval(1.1).is_err());
        assert!(q.eval(-0.1).is_err());
    }
}
