//! Points, rectangles, regions and the log-polar map.
//!
//! Annulus experiments run on the cylinder `(theta, u)` with `z = e^{u + i theta}`.
//! Angles along a trace are unwrapped (not reduced mod 2 pi).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type P2 = [f64; 2];

pub const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.width() * self.height()
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    pub fn contains(&self, p: P2) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(self.x0.min(o.x0), self.y0.min(o.y0), self.x1.max(o.x1), self.y1.max(o.y1))
    }

    pub fn expand(&self, m: f64) -> Rect {
        Rect::new(self.x0 - m, self.y0 - m, self.x1 + m, self.y1 + m)
    }

    /// Bounding box of a point set; `None` when empty.
    pub fn bounding(pts: &[P2]) -> Option<Rect> {
        let first = pts.first()?;
        let mut r = Rect::new(first[0], first[1], first[0], first[1]);
        for p in &pts[1..] {
            r.x0 = r.x0.min(p[0]);
            r.x1 = r.x1.max(p[0]);
            r.y0 = r.y0.min(p[1]);
            r.y1 = r.y1.max(p[1]);
        }
        Some(r)
    }
}

/// A set in the plane used to restrict soups.
pub trait Region: Sync {
    fn contains(&self, p: P2) -> bool;

    fn contains_all(&self, pts: &[P2]) -> bool {
        pts.iter().all(|&p| self.contains(p))
    }
}

impl Region for Rect {
    fn contains(&self, p: P2) -> bool {
        Rect::contains(self, p)
    }
}

/// Open disk.
#[derive(Debug, Clone, Copy)]
pub struct Disk {
    pub center: P2,
    pub radius: f64,
}

impl Region for Disk {
    fn contains(&self, p: P2) -> bool {
        dist(p, self.center) < self.radius
    }
}

/// Open annulus `r_in < |z - center| < r_out`.
#[derive(Debug, Clone, Copy)]
pub struct Annulus {
    pub center: P2,
    pub r_in: f64,
    pub r_out: f64,
}

impl Region for Annulus {
    fn contains(&self, p: P2) -> bool {
        let d = dist(p, self.center);
        d > self.r_in && d < self.r_out
    }
}

/// Horizontal band `u0 < y < u1` (the annulus `A(u0, u1)` in cylinder coordinates).
#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub u0: f64,
    pub u1: f64,
}

impl Region for Band {
    fn contains(&self, p: P2) -> bool {
        p[1] > self.u0 && p[1] < self.u1
    }
}

/// The empty region.
#[derive(Debug, Clone, Copy)]
pub struct Nowhere;

impl Region for Nowhere {
    fn contains(&self, _: P2) -> bool {
        false
    }
}

pub fn dist(a: P2, b: P2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Cylinder point `(theta, u)` to the plane.
pub fn from_log_polar(w: P2) -> P2 {
    let r = w[1].exp();
    [r * w[0].cos(), r * w[0].sin()]
}

/// Plane point to `(theta, u)` with `theta in (-pi, pi]`.
pub fn to_log_polar(z: P2) -> P2 {
    [z[1].atan2(z[0]), z[0].hypot(z[1]).ln()]
}

/// Representative of `theta` in `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Unsigned angular distance on the circle, in `[0, pi]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Exact diameter of a point set (convex hull, then all hull pairs).
pub fn exact_diameter(pts: &[P2]) -> f64 {
    let hull = convex_hull(pts);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max(dist(hull[i], hull[j]));
        }
    }
    best
}

/// Andrew's monotone chain; collinear points dropped.
pub fn convex_hull(pts: &[P2]) -> Vec<P2> {
    let mut p: Vec<P2> = pts.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: P2, a: P2, b: P2| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<P2> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_polar_round_trip() {
        for &z in &[[1.0, 0.0], [0.3, -2.0], [-5.0, 0.1]] {
            let back = from_log_polar(to_log_polar(z));
            assert!(dist(z, back) < 1e-12);
        }
    }

    #[test]
    fn diameter_of_square() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        assert!((exact_diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(convex_hull(&pts).len(), 4);
    }

    #[test]
    fn angle_gap_wraps() {
        assert!((angle_gap(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((angle_gap(0.0, PI) - PI).abs() < 1e-12);
    }
}
