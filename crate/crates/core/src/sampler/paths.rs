//! Brownian crossings and excursions of annuli, in cylinder coordinates
//! `(theta, u)`, `z = e^{u + i theta}`.
//!
//! Planar Brownian motion maps under `log` to a time-changed Brownian motion
//! on the cylinder, so traces are simulated there directly with Gaussian
//! steps of standard deviation `step` per coordinate. The disk `|z| < e^{floor}`
//! is not simulated: a path that drops below `u = floor` is returned to the
//! circle `u = floor` at an angle drawn from the disk's Poisson kernel seen
//! from the point where it dropped, which is its exact exit law.

use crate::geom::{P2, TAU};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Polyline with optional jumps. Segment `(i-1, i)` is not part of the path
/// when `i` is listed in `jumps`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<P2>,
    pub jumps: Vec<usize>,
}

impl Trace {
    /// Continuous pieces of the trace.
    pub fn pieces(&self) -> Vec<&[P2]> {
        let mut out = Vec::with_capacity(self.jumps.len() + 1);
        let mut start = 0;
        for &j in &self.jumps {
            out.push(&self.points[start..j]);
            start = j;
        }
        out.push(&self.points[start..]);
        out
    }

    /// Prefix ending at vertex `end` (inclusive).
    pub fn prefix(&self, end: usize) -> Trace {
        Trace {
            points: self.points[..=end].to_vec(),
            jumps: self.jumps.iter().copied().filter(|&j| j <= end).collect(),
        }
    }

    pub fn first(&self) -> P2 {
        self.points[0]
    }

    pub fn last(&self) -> P2 {
        *self.points.last().unwrap()
    }
}

/// Walk parameters on the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    /// Standard deviation of each coordinate increment.
    pub step: f64,
    /// Log-radius below which the path is resampled by the Poisson kernel.
    pub floor: f64,
}

impl Walk {
    pub fn new(step: f64, floor: f64) -> Self {
        Walk { step, floor }
    }
}

/// Angle offset with the law of the unit-disk Poisson kernel seen from a
/// point at radius `rho`, `(1 - rho^2) / (2 pi (1 - 2 rho cos phi + rho^2))`
/// (the wrapped Cauchy law).
pub fn poisson_kernel_angle<R: Rng + ?Sized>(rng: &mut R, rho: f64) -> f64 {
    let u: f64 = rng.random();
    2.0 * (((1.0 - rho) / (1.0 + rho)) * (PI * (u - 0.5)).tan()).atan()
}

/// Run from `start` until the first hit of `u = r`; the final vertex is
/// interpolated onto `u = r` exactly.
pub fn run_until<R: Rng + ?Sized>(rng: &mut R, start: P2, r: f64, walk: &Walk) -> Trace {
    let mut tr = Trace { points: vec![start], jumps: Vec::new() };
    let [mut th, mut u] = start;
    let s = walk.step;
    loop {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let (nth, nu) = (th + s * z0, u + s * z1);
        if nu >= r {
            let f = (r - u) / (nu - u);
            tr.points.push([th + f * (nth - th), r]);
            return tr;
        }
        if nu < walk.floor {
            tr.points.push([nth, nu]);
            let rho = (nu - walk.floor).exp();
            th = nth + poisson_kernel_angle(rng, rho);
            u = walk.floor;
            tr.jumps.push(tr.points.len());
            tr.points.push([th, u]);
            continue;
        }
        th = nth;
        u = nu;
        tr.points.push([th, u]);
    }
}

/// `k` independent paths from uniform points on `C_0` to `C_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSample {
    pub k: usize,
    pub r: f64,
    pub paths: Vec<Trace>,
}

pub fn sample_crossing_with<R: Rng + ?Sized>(rng: &mut R, k: usize, r: f64, walk: &Walk) -> CrossingSample {
    let paths = (0..k)
        .map(|_| {
            let th = TAU * rng.random::<f64>();
            run_until(rng, [th, 0.0], r, walk)
        })
        .collect();
    CrossingSample { k, r, paths }
}

/// Crossings with step `dt_spatial / 2` (so that a step exceeds
/// `dt_spatial` with probability `e^-2` only) and inner floor `-1`.
pub fn sample_crossing<R: Rng + ?Sized>(k: usize, r: f64, dt_spatial: f64, rng: &mut R) -> CrossingSample {
    sample_crossing_with(rng, k, r, &Walk::new(dt_spatial / 2.0, -1.0))
}

/// Index of the last vertex at or below `level`, and the interpolated point
/// where the path leaves `level` for the last time. `None` if the path never
/// goes down to `level`.
pub fn last_exit(tr: &Trace, level: f64) -> Option<(usize, P2)> {
    let pts = &tr.points;
    let i = pts.iter().rposition(|p| p[1] <= level)?;
    if i + 1 >= pts.len() || tr.jumps.contains(&(i + 1)) {
        return Some((i, pts[i]));
    }
    let (a, b) = (pts[i], pts[i + 1]);
    let f = (level - a[1]) / (b[1] - a[1]);
    Some((i, [a[0] + f * (b[0] - a[0]), level]))
}

/// Excursion from `C_s` to `C_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionSample {
    pub s: f64,
    pub r: f64,
    pub trace: Vec<P2>,
    /// Brownian time of the planar path, `int e^{2u} d(clock)`, trapezoid rule.
    pub duration: f64,
}

impl ExcursionSample {
    /// Net angle turned between `C_s` and `C_r`.
    pub fn angle_change(&self) -> f64 {
        self.trace.last().unwrap()[0] - self.trace[0][0]
    }
}

/// Excursion via the skew product: log-radius `s + |W|` with `W` a 3-d
/// Brownian motion from 0 (a Bessel-3 process), angle an independent Brownian
/// motion from a uniform point, both on the same clock with increments of
/// standard deviation `step`.
pub fn sample_excursion<R: Rng + ?Sized>(s: f64, r: f64, step: f64, rng: &mut R) -> ExcursionSample {
    let mut w = [0.0f64; 3];
    let mut th = TAU * rng.random::<f64>();
    let mut u = s;
    let mut trace = vec![[th, u]];
    let mut duration = 0.0;
    let dtau = step * step;
    loop {
        for c in w.iter_mut() {
            *c += step * rng.sample::<f64, _>(StandardNormal);
        }
        let nth = th + step * rng.sample::<f64, _>(StandardNormal);
        let nu = s + (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if nu >= r {
            let f = (r - u) / (nu - u);
            duration += 0.5 * f * dtau * ((2.0 * u).exp() + (2.0 * r).exp());
            trace.push([th + f * (nth - th), r]);
            return ExcursionSample { s, r, trace, duration };
        }
        duration += 0.5 * dtau * ((2.0 * u).exp() + (2.0 * nu).exp());
        th = nth;
        u = nu;
        trace.push([th, u]);
    }
}

/// Excursion as the part of a Brownian path started at the origin after its
/// last visit to `C_s` and before it first reaches `C_r`. The origin is
/// represented by a uniform start on `u = walk.floor` (its hitting law).
pub fn sample_excursion_via_last_exit<R: Rng + ?Sized>(s: f64, r: f64, walk: &Walk, rng: &mut R) -> ExcursionSample {
    assert!(walk.floor < s);
    let th = TAU * rng.random::<f64>();
    let tr = run_until(rng, [th, walk.floor], r, walk);
    let (i, p) = last_exit(&tr, s).expect("path starts below s");
    let mut trace = vec![p];
    trace.extend_from_slice(&tr.points[i + 1..]);
    let dtau = walk.step * walk.step;
    let duration = trace
        .windows(2)
        .map(|w| 0.5 * dtau * ((2.0 * w[0][1]).exp() + (2.0 * w[1][1]).exp()))
        .sum();
    ExcursionSample { s, r, trace, duration }
}
