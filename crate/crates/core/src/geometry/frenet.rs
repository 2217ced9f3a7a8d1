use serde::{Deserialize, Serialize};

use super::{normalize_angle, GeometryError, ReferencePath};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrenetState {
    pub s: f64,
    pub s_dot: f64,
    pub d: f64,
    pub d_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
}

impl ReferencePath {
    /// Frenét to Cartesian transform:
    ///
    /// ```text
    /// x     = x_r - d sin(theta_r)
    /// y     = y_r + d cos(theta_r)
    /// v     = sqrt(((1 - kappa_r d) s_dot)^2 + d_dot^2)
    /// theta = asin(d_dot / v) + theta_r
    /// ```
    ///
    /// A stationary vehicle (`v == 0`) is reported aligned with the road.
    pub fn frenet_to_cartesian(&self, f: &FrenetState) -> Result<CartesianState, GeometryError> {
        if f.s_dot < 0.0 {
            return Err(GeometryError::NegativeSpeed(f.s_dot));
        }
        let r = self.sample_at(f.s)?;
        let scale = 1.0 - r.kappa * f.d;
        if scale <= 0.0 {
            return Err(GeometryError::SingularOffset { d: f.d, kappa: r.kappa });
        }
        let (sin_r, cos_r) = r.theta.sin_cos();
        let x = r.x - f.d * sin_r;
        let y = r.y + f.d * cos_r;
        let v = (scale * f.s_dot).hypot(f.d_dot);
        if !(f.d_dot.abs() <= v) {
            return Err(GeometryError::InvalidLateralRate { d_dot: f.d_dot, v });
        }
        let theta = if v > 0.0 {
            normalize_angle((f.d_dot / v).clamp(-1.0, 1.0).asin() + r.theta)
        } else {
            r.theta
        };
        Ok(CartesianState { x, y, v, theta })
    }

    /// Inverse transform: nearest-point projection refined by bisection on
    /// the station table, then the velocity terms are solved back out.
    pub fn cartesian_to_frenet(&self, c: &CartesianState) -> Result<FrenetState, GeometryError> {
        let (s, d) = self.project(c.x, c.y)?;
        let (_, _, theta_r, kappa) = self.interpolate(s);
        let scale = 1.0 - kappa * d;
        if scale <= 0.0 {
            return Err(GeometryError::SingularOffset { d, kappa });
        }
        let dtheta = c.theta - theta_r;
        Ok(FrenetState {
            s,
            s_dot: c.v * dtheta.cos() / scale,
            d,
            d_dot: c.v * dtheta.sin(),
        })
    }

    /// Arclength and signed lateral offset of the nearest foot point.
    pub fn project(&self, x: f64, y: f64) -> Result<(f64, f64), GeometryError> {
        // Along-track residual; its zeros are the perpendicular foot points.
        let residual = |s: f64| {
            let (px, py, th, _) = self.interpolate(s);
            (x - px) * th.cos() + (y - py) * th.sin()
        };
        let lateral = |s: f64| {
            let (px, py, th, _) = self.interpolate(s);
            -(x - px) * th.sin() + (y - py) * th.cos()
        };

        let n = self.station_count();
        let mut roots: Vec<(f64, f64)> = Vec::new();
        let mut prev = residual(0.0);
        if prev == 0.0 {
            roots.push((0.0, lateral(0.0)));
        }
        for i in 1..n {
            let s_hi = (i as f64 * self.step()).min(self.length());
            let cur = residual(s_hi);
            if cur == 0.0 {
                roots.push((s_hi, lateral(s_hi)));
            } else if prev * cur < 0.0 && prev != 0.0 {
                let (mut lo, mut hi) = ((i - 1) as f64 * self.step(), s_hi);
                let mut f_lo = prev;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let f_mid = residual(mid);
                    if f_mid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if f_lo * f_mid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        f_lo = f_mid;
                    }
                    if hi - lo < 1e-13 {
                        break;
                    }
                }
                let s = 0.5 * (lo + hi);
                roots.push((s, lateral(s)));
            }
            prev = cur;
        }

        let corridor = self.corridor();
        roots.retain(|(_, d)| d.abs() <= corridor);
        let best = roots
            .iter()
            .copied()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or(GeometryError::OutsideCorridor { corridor })?;
        if let Some(other) = roots
            .iter()
            .find(|r| (r.1.abs() - best.1.abs()).abs() < 1e-6 && (r.0 - best.0).abs() > 1.0)
        {
            return Err(GeometryError::ProjectionAmbiguous(best.0, other.0));
        }
        Ok(best)
    }
}
