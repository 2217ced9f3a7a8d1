use serde::{Deserialize, Serialize};

use crate::geometry::{
    normalize_angle, BoundaryState, FrenetState, GeometryError, QuinticPolynomial, ReferencePath,
};

/// Frenét state with accelerations, the boundary of one planning segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KinematicState {
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
    pub d: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
}

impl KinematicState {
    pub fn from_frenet(f: &FrenetState) -> Self {
        Self { s: f.s, s_dot: f.s_dot, s_ddot: 0.0, d: f.d, d_dot: f.d_dot, d_ddot: 0.0 }
    }

    pub fn frenet(&self) -> FrenetState {
        FrenetState { s: self.s, s_dot: self.s_dot, d: self.d, d_dot: self.d_dot }
    }
}

/// One sample of a planned trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub tick: u64,
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
    pub s_dddot: f64,
    pub d: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl TrajectoryPoint {
    pub fn kinematic(&self) -> KinematicState {
        KinematicState {
            s: self.s,
            s_dot: self.s_dot,
            s_ddot: self.s_ddot,
            d: self.d,
            d_dot: self.d_dot,
            d_ddot: self.d_ddot,
        }
    }

    pub fn frenet(&self) -> FrenetState {
        FrenetState { s: self.s, s_dot: self.s_dot, d: self.d, d_dot: self.d_dot }
    }

    /// Heading relative to the road direction.
    pub fn relative_heading(&self) -> f64 {
        if self.v > 0.0 {
            (self.d_dot / self.v).clamp(-1.0, 1.0).asin()
        } else {
            0.0
        }
    }
}

/// Lateral and longitudinal quintics of one candidate, sampled every tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubTrajectory {
    pub longitudinal: QuinticPolynomial,
    pub lateral: QuinticPolynomial,
    /// `ticks + 1` points; the first repeats the start state.
    pub points: Vec<TrajectoryPoint>,
}

/// Joins `start` to the end state `(end_speed, end_offset)` after `ticks`
/// ticks. The end is reached with zero acceleration and zero lateral rate;
/// the end station assumes a linear speed change.
pub fn generate_subtrajectory(
    start: &KinematicState,
    start_tick: u64,
    end_speed: f64,
    end_offset: f64,
    ticks: usize,
    tick: f64,
    path: &ReferencePath,
) -> Result<SubTrajectory, GeometryError> {
    let duration = ticks as f64 * tick;
    let end_s = start.s + 0.5 * (start.s_dot + end_speed) * duration;
    let longitudinal = QuinticPolynomial::fit(
        BoundaryState::new(start.s, start.s_dot, start.s_ddot),
        BoundaryState::new(end_s, end_speed, 0.0),
        duration,
    )?;
    let lateral = QuinticPolynomial::fit(
        BoundaryState::new(start.d, start.d_dot, start.d_ddot),
        BoundaryState::new(end_offset, 0.0, 0.0),
        duration,
    )?;
    let points = sample_polynomials(&longitudinal, &lateral, start_tick, ticks, tick, path)?;
    Ok(SubTrajectory { longitudinal, lateral, points })
}

pub(crate) fn sample_polynomials(
    lon: &QuinticPolynomial,
    lat: &QuinticPolynomial,
    start_tick: u64,
    ticks: usize,
    tick: f64,
    path: &ReferencePath,
) -> Result<Vec<TrajectoryPoint>, GeometryError> {
    let mut points = Vec::with_capacity(ticks + 1);
    for k in 0..=ticks {
        let t = (k as f64 * tick).min(lon.duration);
        let [s, s_dot, s_ddot, s_dddot] = lon.eval_unchecked(t);
        let [d, d_dot, d_ddot, _] = lat.eval_unchecked(t);
        points.push(make_point(start_tick + k as u64, s, s_dot, s_ddot, s_dddot, d, d_dot, d_ddot, path)?);
    }
    fill_curvature(&mut points);
    Ok(points)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn make_point(
    tick: u64,
    s: f64,
    s_dot: f64,
    s_ddot: f64,
    s_dddot: f64,
    d: f64,
    d_dot: f64,
    d_ddot: f64,
    path: &ReferencePath,
) -> Result<TrajectoryPoint, GeometryError> {
    // Slightly negative speeds from polynomial overshoot are reported as
    // such (and rejected by the feasibility check) rather than failing here.
    let f = FrenetState { s: s.clamp(0.0, path.length()), s_dot: s_dot.max(0.0), d, d_dot };
    let c = path.frenet_to_cartesian(&f)?;
    Ok(TrajectoryPoint {
        tick,
        s,
        s_dot,
        s_ddot,
        s_dddot,
        d,
        d_dot,
        d_ddot,
        x: c.x,
        y: c.y,
        v: if s_dot < 0.0 { s_dot } else { c.v },
        theta: c.theta,
        kappa: 0.0,
    })
}

/// Heading change per unit arc length by central differences, one-sided at
/// the ends. Samples closer than a millimetre are treated as straight.
pub(crate) fn fill_curvature(points: &mut [TrajectoryPoint]) {
    let n = points.len();
    if n < 2 {
        return;
    }
    let kappa: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let (p, q) = (&points[a], &points[b]);
            let mut arc = 0.0;
            for w in points[a..=b].windows(2) {
                arc += (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            }
            if arc < 1e-3 {
                0.0
            } else {
                normalize_angle(q.theta - p.theta) / arc
            }
        })
        .collect();
    for (p, k) in points.iter_mut().zip(kappa) {
        p.kappa = k;
    }
}
