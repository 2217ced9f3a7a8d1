use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Arclength spacing of the resampled station table (m).
pub const RESAMPLE_STEP: f64 = 0.5;
/// Default half-width of the projection corridor (two 3.5 m lanes).
pub const DEFAULT_CORRIDOR: f64 = 7.0;
/// Curvature above which a path is rejected (1/m).
pub const DEFAULT_MAX_CURVATURE: f64 = 0.5;

/// A point on the reference path at arclength `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
}

/// Lane centerline resampled at a uniform arclength step.
///
/// Waypoints are joined by cubic Hermite segments whose tangents come from
/// the circle through each waypoint and its neighbours, so circular arcs are
/// reproduced without the corner artifacts of a raw polyline. The resulting
/// curve is then resampled at (approximately) [`RESAMPLE_STEP`] and every
/// query interpolates within the station table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePath {
    waypoints: Vec<[f64; 2]>,
    step: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Unwrapped headings, so neighbouring stations never jump by more than pi.
    thetas: Vec<f64>,
    kappas: Vec<f64>,
    corridor: f64,
}

struct Hermite {
    p0: [f64; 2],
    p1: [f64; 2],
    m0: [f64; 2],
    m1: [f64; 2],
}

impl Hermite {
    fn point(&self, u: f64) -> [f64; 2] {
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        [
            h00 * self.p0[0] + h10 * self.m0[0] + h01 * self.p1[0] + h11 * self.m1[0],
            h00 * self.p0[1] + h10 * self.m0[1] + h01 * self.p1[1] + h11 * self.m1[1],
        ]
    }

    fn deriv(&self, u: f64) -> [f64; 2] {
        let u2 = u * u;
        let h00 = 6.0 * u2 - 6.0 * u;
        let h10 = 3.0 * u2 - 4.0 * u + 1.0;
        let h01 = -6.0 * u2 + 6.0 * u;
        let h11 = 3.0 * u2 - 2.0 * u;
        [
            h00 * self.p0[0] + h10 * self.m0[0] + h01 * self.p1[0] + h11 * self.m1[0],
            h00 * self.p0[1] + h10 * self.m0[1] + h01 * self.p1[1] + h11 * self.m1[1],
        ]
    }

    fn speed(&self, u: f64) -> f64 {
        let d = self.deriv(u);
        d[0].hypot(d[1])
    }

    /// Arclength over `[0, u]` by 8-point Gauss-Legendre quadrature.
    fn arc(&self, u: f64) -> f64 {
        const NODES: [f64; 4] = [
            0.183_434_642_495_649_8,
            0.525_532_409_916_329,
            0.796_666_477_413_626_7,
            0.960_289_856_497_536_3,
        ];
        const WEIGHTS: [f64; 4] = [
            0.362_683_783_378_362,
            0.313_706_645_877_887_3,
            0.222_381_034_453_374_5,
            0.101_228_536_290_376_3,
        ];
        let half = 0.5 * u;
        let mut acc = 0.0;
        for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
            acc += w * (self.speed(half * (1.0 - x)) + self.speed(half * (1.0 + x)));
        }
        acc * half
    }

    /// Parameter at which the arclength from the segment start equals `target`.
    fn param_at(&self, target: f64, total: f64) -> f64 {
        let mut u = (target / total).clamp(0.0, 1.0);
        for _ in 0..30 {
            let err = self.arc(u) - target;
            if err.abs() < 1e-13 {
                break;
            }
            let sp = self.speed(u).max(1e-12);
            u = (u - err / sp).clamp(0.0, 1.0);
        }
        u
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn unit(a: [f64; 2]) -> [f64; 2] {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// Tangent directions at each waypoint, exact for points on a circle.
fn waypoint_tangents(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = pts.len();
    if n == 2 {
        let c = unit(sub(pts[1], pts[0]));
        return vec![c, c];
    }
    let mut tangents = vec![[0.0; 2]; n];
    for i in 1..n - 1 {
        let a = sub(pts[i], pts[i - 1]);
        let b = sub(pts[i + 1], pts[i]);
        let (h1, h2) = (norm(a), norm(b));
        let t = [
            h2 / h1 * a[0] + h1 / h2 * b[0],
            h2 / h1 * a[1] + h1 / h2 * b[1],
        ];
        tangents[i] = unit(t);
    }
    // End tangents mirror the neighbouring tangent across the end chord.
    let reflect = |t: [f64; 2], c: [f64; 2]| {
        let dot = t[0] * c[0] + t[1] * c[1];
        unit([2.0 * dot * c[0] - t[0], 2.0 * dot * c[1] - t[1]])
    };
    tangents[0] = reflect(tangents[1], unit(sub(pts[1], pts[0])));
    tangents[n - 1] = reflect(tangents[n - 2], unit(sub(pts[n - 1], pts[n - 2])));
    tangents
}

impl ReferencePath {
    pub fn new(waypoints: &[[f64; 2]]) -> Result<Self, GeometryError> {
        Self::with_max_curvature(waypoints, DEFAULT_MAX_CURVATURE)
    }

    pub fn with_max_curvature(
        waypoints: &[[f64; 2]],
        max_curvature: f64,
    ) -> Result<Self, GeometryError> {
        if waypoints.len() < 2 {
            return Err(GeometryError::DegeneratePath(format!(
                "need at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if waypoints.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::DegeneratePath("non-finite waypoint".into()));
        }
        for (i, w) in waypoints.windows(2).enumerate() {
            if norm(sub(w[1], w[0])) < 1e-9 {
                return Err(GeometryError::DegeneratePath(format!(
                    "waypoints {} and {} coincide",
                    i,
                    i + 1
                )));
            }
        }

        let tangents = waypoint_tangents(waypoints);
        let segments: Vec<Hermite> = waypoints
            .windows(2)
            .zip(tangents.windows(2))
            .map(|(p, t)| {
                let len = norm(sub(p[1], p[0]));
                Hermite {
                    p0: p[0],
                    p1: p[1],
                    m0: [t[0][0] * len, t[0][1] * len],
                    m1: [t[1][0] * len, t[1][1] * len],
                }
            })
            .collect();
        let seg_len: Vec<f64> = segments.iter().map(|h| h.arc(1.0)).collect();
        let mut cumulative = Vec::with_capacity(seg_len.len() + 1);
        cumulative.push(0.0);
        for l in &seg_len {
            cumulative.push(cumulative.last().unwrap() + l);
        }
        let total = *cumulative.last().unwrap();
        let intervals = (total / RESAMPLE_STEP - 1e-9).ceil().max(1.0) as usize;
        let step = total / intervals as f64;

        let mut xs = Vec::with_capacity(intervals + 1);
        let mut ys = Vec::with_capacity(intervals + 1);
        let mut thetas = Vec::with_capacity(intervals + 1);
        let mut seg = 0;
        for k in 0..=intervals {
            let s = if k == intervals { total } else { k as f64 * step };
            while seg + 1 < segments.len() && s > cumulative[seg + 1] {
                seg += 1;
            }
            let h = &segments[seg];
            let u = h.param_at(s - cumulative[seg], seg_len[seg]);
            let p = h.point(u);
            let d = h.deriv(u);
            let mut theta = d[1].atan2(d[0]);
            if let Some(prev) = thetas.last() {
                let prev: f64 = *prev;
                while theta - prev > std::f64::consts::PI {
                    theta -= 2.0 * std::f64::consts::PI;
                }
                while theta - prev < -std::f64::consts::PI {
                    theta += 2.0 * std::f64::consts::PI;
                }
            }
            xs.push(p[0]);
            ys.push(p[1]);
            thetas.push(theta);
        }

        let n = thetas.len();
        let mut kappas = vec![0.0; n];
        for i in 0..n {
            kappas[i] = if i == 0 {
                (thetas[1] - thetas[0]) / step
            } else if i == n - 1 {
                (thetas[n - 1] - thetas[n - 2]) / step
            } else {
                (thetas[i + 1] - thetas[i - 1]) / (2.0 * step)
            };
        }
        if let Some(k) = kappas.iter().find(|k| k.abs() > max_curvature) {
            return Err(GeometryError::DegeneratePath(format!(
                "curvature {k:.4} exceeds the limit {max_curvature}"
            )));
        }

        Ok(Self {
            waypoints: waypoints.to_vec(),
            step,
            xs,
            ys,
            thetas,
            kappas,
            corridor: DEFAULT_CORRIDOR,
        })
    }

    /// Copy of this path using a different projection corridor half-width.
    pub fn with_corridor(mut self, corridor: f64) -> Self {
        self.corridor = corridor;
        self
    }

    pub fn corridor(&self) -> f64 {
        self.corridor
    }

    pub fn waypoints(&self) -> &[[f64; 2]] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        self.step * (self.xs.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn station_count(&self) -> usize {
        self.xs.len()
    }

    pub fn station(&self, i: usize) -> PathSample {
        PathSample {
            s: i as f64 * self.step,
            x: self.xs[i],
            y: self.ys[i],
            theta: super::normalize_angle(self.thetas[i]),
            kappa: self.kappas[i],
        }
    }

    pub fn sample_at(&self, s: f64) -> Result<PathSample, GeometryError> {
        let len = self.length();
        // Tolerate rounding at the far end of the table.
        if !(s >= -1e-9 && s <= len + 1e-9) {
            return Err(GeometryError::OutOfRange { value: s, lo: 0.0, hi: len });
        }
        let s = s.clamp(0.0, len);
        let (x, y, theta, kappa) = self.interpolate(s);
        Ok(PathSample {
            s,
            x,
            y,
            theta: super::normalize_angle(theta),
            kappa,
        })
    }

    /// Position, unwrapped heading and curvature at an in-range `s`.
    pub(crate) fn interpolate(&self, s: f64) -> (f64, f64, f64, f64) {
        let last = self.xs.len() - 1;
        let i = ((s / self.step).floor() as usize).min(last - 1);
        let u = ((s - i as f64 * self.step) / self.step).clamp(0.0, 1.0);
        let (t0, t1) = (self.thetas[i], self.thetas[i + 1]);
        let h = Hermite {
            p0: [self.xs[i], self.ys[i]],
            p1: [self.xs[i + 1], self.ys[i + 1]],
            m0: [t0.cos() * self.step, t0.sin() * self.step],
            m1: [t1.cos() * self.step, t1.sin() * self.step],
        };
        let p = h.point(u);
        let theta = t0 + (t1 - t0) * u;
        let kappa = self.kappas[i] + (self.kappas[i + 1] - self.kappas[i]) * u;
        (p[0], p[1], theta, kappa)
    }

    /// Centerline shifted laterally by `d` (positive towards +d), rebuilt
    /// from the shifted stations.
    pub fn offset(&self, d: f64) -> Result<Self, GeometryError> {
        let pts: Vec<[f64; 2]> = (0..self.xs.len())
            .step_by(4)
            .chain(std::iter::once(self.xs.len() - 1))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|i| {
                let th = self.thetas[i];
                [self.xs[i] - d * th.sin(), self.ys[i] + d * th.cos()]
            })
            .collect();
        Self::new(&pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quarter_circle(r: f64) -> Vec<[f64; 2]> {
        (0..=90)
            .map(|deg| {
                let a = (deg as f64).to_radians();
                [r * a.sin(), r * (1.0 - a.cos())]
            })
            .collect()
    }

    #[test]
    fn straight_two_point_path() {
        let p = ReferencePath::new(&[[0.0, 0.0], [100.0, 0.0]]).unwrap();
        assert!((p.length() - 100.0).abs() < 1e-9);
        assert_eq!(p.station_count(), 201);
        for i in 0..p.station_count() {
            let st = p.station(i);
            assert!(st.theta.abs() < 1e-12);
            assert!(st.kappa.abs() < 1e-12);
        }
        let s = p.sample_at(30.0).unwrap();
        assert!((s.x - 30.0).abs() < 1e-9 && s.y.abs() < 1e-12);
        assert_eq!(s.kappa, 0.0);
    }

    #[test]
    fn start_of_path_is_first_waypoint() {
        let wp = quarter_circle(50.0);
        let p = ReferencePath::new(&wp).unwrap();
        let s0 = p.sample_at(0.0).unwrap();
        assert_eq!((s0.x, s0.y), (wp[0][0], wp[0][1]));
    }

    #[test]
    fn circle_curvature_matches_analytic() {
        let p = ReferencePath::new(&quarter_circle(50.0)).unwrap();
        assert!((p.length() - 25.0 * PI).abs() < 1e-4);
        for i in 0..p.station_count() {
            assert!((p.station(i).kappa - 0.02).abs() < 1e-3, "station {i}");
        }
        let q = p.sample_at(p.length()).unwrap();
        assert!((q.x - 50.0).abs() < 1e-3 && (q.y - 50.0).abs() < 1e-3);
        assert!((q.theta - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn duplicate_waypoint_is_degenerate() {
        let err = ReferencePath::new(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, GeometryError::DegeneratePath(_)));
        assert!(ReferencePath::new(&[[0.0, 0.0]]).is_err());
    }

    #[test]
    fn sample_outside_domain_errors() {
        let p = ReferencePath::new(&[[0.0, 0.0], [10.0, 0.0]]).unwrap();
        assert!(matches!(p.sample_at(-1.0), Err(GeometryError::OutOfRange { .. })));
        assert!(matches!(p.sample_at(10.5), Err(GeometryError::OutOfRange { .. })));
    }

    #[test]
    fn tight_turn_rejected_by_curvature_limit() {
        let wp: Vec<[f64; 2]> = (0..=18)
            .map(|k| {
                let a = (k as f64 * 10.0).to_radians();
                [a.sin(), 1.0 - a.cos()]
            })
            .collect();
        assert!(ReferencePath::new(&wp).is_err());
    }

    #[test]
    fn offset_of_straight_path_is_parallel() {
        let p = ReferencePath::new(&[[0.0, 0.0], [50.0, 0.0]]).unwrap();
        let q = p.offset(3.5).unwrap();
        let s = q.sample_at(20.0).unwrap();
        assert!((s.y - 3.5).abs() < 1e-9 && (s.x - 20.0).abs() < 1e-9);
    }
}
