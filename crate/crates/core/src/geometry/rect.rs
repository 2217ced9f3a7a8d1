/// Vehicle footprint: a rectangle centred on `(x, y)` whose long axis points
/// along `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn new(x: f64, y: f64, heading: f64, length: f64, width: f64) -> Self {
        Self { x, y, heading, length, width }
    }

    fn axes(&self) -> ([f64; 2], [f64; 2]) {
        let (s, c) = self.heading.sin_cos();
        ([c, s], [-s, c])
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (u, n) = self.axes();
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        let mut out = [[0.0; 2]; 4];
        for (k, (a, b)) in [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].iter().enumerate() {
            out[k] = [
                self.x + a * u[0] + b * n[0],
                self.y + a * u[1] + b * n[1],
            ];
        }
        out
    }

    /// Interior intersection by the separating axis test; touching edges do
    /// not count as overlap.
    pub fn overlaps(&self, other: &OrientedRect) -> bool {
        let (a, b) = (self.corners(), other.corners());
        let (u1, n1) = self.axes();
        let (u2, n2) = other.axes();
        for axis in [u1, n1, u2, n2] {
            let proj = |pts: &[[f64; 2]; 4]| {
                pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let v = p[0] * axis[0] + p[1] * axis[1];
                    (lo.min(v), hi.max(v))
                })
            };
            let (alo, ahi) = proj(&a);
            let (blo, bhi) = proj(&b);
            if ahi <= blo + 1e-12 || bhi <= alo + 1e-12 {
                return false;
            }
        }
        true
    }

    /// Signed gaps from this body to `other` along this rectangle's own
    /// longitudinal and lateral axes, each clamped at zero when the
    /// projections overlap. The sign of the longitudinal component tells
    /// whether `other` lies ahead (positive) or behind.
    pub fn body_frame_gaps(&self, other: &OrientedRect) -> (f64, f64) {
        let (u, n) = self.axes();
        let (mut xlo, mut xhi, mut ylo, mut yhi) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in other.corners() {
            let rx = p[0] - self.x;
            let ry = p[1] - self.y;
            let lx = rx * u[0] + ry * u[1];
            let ly = rx * n[0] + ry * n[1];
            xlo = xlo.min(lx);
            xhi = xhi.max(lx);
            ylo = ylo.min(ly);
            yhi = yhi.max(ly);
        }
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        let gx = if xlo > hl {
            xlo - hl
        } else if xhi < -hl {
            xhi + hl
        } else {
            0.0
        };
        let gy = if ylo > hw {
            ylo - hw
        } else if yhi < -hw {
            -(yhi + hw)
        } else {
            0.0
        };
        (gx, gy)
    }

    /// Euclidean distance between the two rectangles (0 when they overlap).
    pub fn distance(&self, other: &OrientedRect) -> f64 {
        if self.overlaps(other) {
            return 0.0;
        }
        let (a, b) = (self.corners(), other.corners());
        let mut best = f64::INFINITY;
        for (pts, poly) in [(&a, &b), (&b, &a)] {
            for p in pts.iter() {
                for k in 0..4 {
                    best = best.min(point_segment_distance(*p, poly[k], poly[(k + 1) % 4]));
                }
            }
        }
        best
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    q[0].hypot(q[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_lanes_distance() {
        let a = OrientedRect::new(0.0, 0.0, 0.0, 5.0, 2.0);
        let b = OrientedRect::new(0.0, 3.5, 0.0, 5.0, 2.0);
        assert!((a.distance(&b) - 1.5).abs() < 1e-12);
        assert!(!a.overlaps(&b));
    }

    #[test]
    fn rotated_overlap_detected() {
        let a = OrientedRect::new(0.0, 0.0, 0.0, 5.0, 2.0);
        let b = OrientedRect::new(2.0, 1.5, 0.8, 5.0, 2.0);
        assert!(a.overlaps(&b));
        assert_eq!(a.distance(&b), 0.0);
    }

    #[test]
    fn gaps_in_body_frame() {
        let a = OrientedRect::new(0.0, 0.0, 0.0, 5.0, 2.0);
        let ahead = OrientedRect::new(12.5, 0.0, 0.0, 5.0, 2.0);
        assert_eq!(a.body_frame_gaps(&ahead), (7.5, 0.0));
        let behind_left = OrientedRect::new(-10.0, 3.5, 0.0, 5.0, 2.0);
        let (gx, gy) = a.body_frame_gaps(&behind_left);
        assert!((gx + 5.0).abs() < 1e-12 && (gy - 1.5).abs() < 1e-12);
    }
}
