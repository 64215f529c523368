//! Loop soups, annulus crossings and excursions.
//!
//! Soups live either in the plane or on the cylinder `[0, 2 pi) x R` (the
//! log-polar image of an annulus). Cylinder loops may wind around; a loop with
//! winding `k` ends at `root + (2 pi k, 0)`.

pub mod bridge;
pub mod io;
pub mod paths;

use crate::error::{Error, Result};
use crate::geom::{exact_diameter, Rect, Region, P2, TAU};
use crate::raster::{frontier, Grid, OccupancyRaster};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use bridge::{bridge_forward, bridge_midpoint};
pub use paths::{
    last_exit, poisson_kernel_angle, run_until, sample_crossing, sample_crossing_with, sample_excursion, sample_excursion_via_last_exit,
    CrossingSample, ExcursionSample, Trace, Walk,
};

/// One rooted Brownian loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSample {
    pub root: P2,
    pub duration: f64,
    pub trace: Vec<P2>,
    /// Number of turns around the cylinder (always 0 in the plane).
    #[serde(default)]
    pub winding: i32,
    /// Whether every vertex lies in the sampling region.
    pub contained: bool,
}

impl LoopSample {
    pub fn bbox(&self) -> Rect {
        Rect::bounding(&self.trace).expect("trace is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Surface {
    #[default]
    Plane,
    /// Periodic in x with period `2 pi`; `region.x0 = 0`, `region.x1 = 2 pi`.
    Cylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoupConfig {
    pub c: f64,
    pub region: Rect,
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub surface: Surface,
}

impl SoupConfig {
    pub fn plane(c: f64, region: Rect, t_min: f64, t_max: f64, seed: u64) -> Self {
        SoupConfig { c, region, t_min, t_max, dt: t_min / 8.0, seed, surface: Surface::Plane }
    }

    /// Cylinder soup with roots in the band `u0 <= u <= u1`.
    pub fn cylinder(c: f64, u0: f64, u1: f64, t_min: f64, t_max: f64, seed: u64) -> Self {
        SoupConfig {
            c,
            region: Rect::new(0.0, u0, TAU, u1),
            t_min,
            t_max,
            dt: t_min / 8.0,
            seed,
            surface: Surface::Cylinder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(0.0..=1.0).contains(&self.c) {
            bad.push(format!("c = {} outside [0, 1]", self.c));
        }
        if !(self.t_min > 0.0) {
            bad.push(format!("t_min = {} must be positive", self.t_min));
        }
        if !(self.t_max > self.t_min) {
            bad.push(format!("t_max = {} must exceed t_min = {}", self.t_max, self.t_min));
        }
        if !(self.dt > 0.0) || self.dt > self.t_min / 8.0 * (1.0 + 1e-12) {
            bad.push(format!("dt = {} must lie in (0, t_min/8]", self.dt));
        }
        if self.region.is_empty() {
            bad.push("region is empty".into());
        }
        if self.surface == Surface::Cylinder && (self.region.x0 != 0.0 || (self.region.x1 - TAU).abs() > 1e-12) {
            bad.push("cylinder region must span x in [0, 2 pi]".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(bad))
        }
    }
}

/// Theta function `sum_k exp(-2 pi^2 k^2 / t)`: the ratio of the cylinder
/// heat kernel on the diagonal to the planar one.
pub fn winding_theta(t: f64) -> f64 {
    let mut s = 1.0;
    for k in 1.. {
        let term = (-2.0 * PI * PI * (k * k) as f64 / t).exp();
        s += 2.0 * term;
        if term < 1e-17 {
            break;
        }
    }
    s
}

/// Expected number of loops: `c * Area * int_{t_min}^{t_max} theta(t)/(2 pi t^2) dt`
/// (`theta = 1` in the plane).
pub fn soup_mass(cfg: &SoupConfig) -> f64 {
    let base = 1.0 / cfg.t_min - 1.0 / cfg.t_max;
    let integral = match cfg.surface {
        Surface::Plane => base,
        Surface::Cylinder => {
            let mut s = base;
            for k in 1.. {
                let a = 2.0 * PI * PI * (k * k) as f64;
                let term = ((-a / cfg.t_max).exp() - (-a / cfg.t_min).exp()) / a;
                s += 2.0 * term;
                if term < 1e-17 * base {
                    break;
                }
            }
            s
        }
    };
    cfg.c * cfg.region.area() * integral / (2.0 * PI)
}

/// Duration from the density proportional to `t^-2` on `[t_min, t_max]`.
pub fn sample_duration<R: Rng + ?Sized>(rng: &mut R, t_min: f64, t_max: f64) -> f64 {
    let u: f64 = rng.random();
    1.0 / (1.0 / t_min - u * (1.0 / t_min - 1.0 / t_max))
}

fn sample_winding<R: Rng + ?Sized>(rng: &mut R, t: f64) -> i32 {
    let kmax = (3.0 * t.sqrt()).ceil() as i32 + 1;
    let w: Vec<f64> = (-kmax..=kmax)
        .map(|k| (-2.0 * PI * PI * (k * k) as f64 / t).exp())
        .collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, wi) in w.iter().enumerate() {
        u -= wi;
        if u <= 0.0 {
            return i as i32 - kmax;
        }
    }
    0
}

/// Poisson sample of loops under the cutoff loop measure.
pub fn sample_loop_soup<R: Rng + ?Sized>(cfg: &SoupConfig, rng: &mut R) -> Result<Vec<LoopSample>> {
    cfg.validate()?;
    let mass = soup_mass(cfg);
    if mass <= 0.0 {
        return Ok(Vec::new());
    }
    let n = Poisson::new(mass).map_err(|e| Error::Domain(e.to_string()))?.sample(rng) as usize;
    let reg = cfg.region;
    let theta_max = winding_theta(cfg.t_max);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let root = [
            reg.x0 + rng.random::<f64>() * reg.width(),
            reg.y0 + rng.random::<f64>() * reg.height(),
        ];
        let (t, winding) = match cfg.surface {
            Surface::Plane => (sample_duration(rng, cfg.t_min, cfg.t_max), 0),
            Surface::Cylinder => loop {
                let t = sample_duration(rng, cfg.t_min, cfg.t_max);
                if rng.random::<f64>() * theta_max <= winding_theta(t) {
                    break (t, sample_winding(rng, t));
                }
            },
        };
        let steps = ((t / cfg.dt).ceil() as usize).max(8);
        let end = [root[0] + TAU * winding as f64, root[1]];
        let trace = bridge_forward(rng, root, end, t, steps);
        let contained = match cfg.surface {
            Surface::Plane => trace.iter().all(|&p| reg.contains(p)),
            Surface::Cylinder => trace.iter().all(|p| p[1] >= reg.y0 && p[1] <= reg.y1),
        };
        out.push(LoopSample { root, duration: t, trace, winding, contained });
    }
    Ok(out)
}

/// Soup drawn from the stream determined by `cfg.seed`.
pub fn sample_loop_soup_seeded(cfg: &SoupConfig) -> Result<Vec<LoopSample>> {
    let mut rng = crate::rng::stream(cfg.seed, &[0x50_55_50], 0);
    sample_loop_soup(cfg, &mut rng)
}

/// The loops whose whole trace lies in `sub`.
pub fn restrict_soup(loops: &[LoopSample], sub: &dyn Region) -> Vec<LoopSample> {
    loops.iter().filter(|l| sub.contains_all(&l.trace)).cloned().collect()
}

/// Parameters of [`loop_mass_above_diameter`].
#[derive(Debug, Clone, Copy)]
pub struct MassWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Vertices per sampled loop (also sets the per-loop raster resolution).
    pub vertices: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct MassEstimate {
    pub value: f64,
    pub stderr: f64,
    pub hits: usize,
}

/// Monte Carlo estimate of the loop-measure mass (durations cut to
/// `[t_min, t_max]`) of loops whose outer boundary meets the closed unit disk
/// and whose diameter is at least `R`.
///
/// The outer boundary is the raster frontier of the loop at resolution
/// `sqrt(t)/sqrt(vertices)`. Roots are drawn in the disk of radius
/// `1 + 5 sqrt(t)` (loops rooted further out essentially never reach the unit
/// disk), which makes the proposal mass
/// `int (1 + 5 sqrt t)^2 / (2 t^2) dt` explicit.
pub fn loop_mass_above_diameter(r_min: f64, w: &MassWindow) -> Result<MassEstimate> {
    if !(r_min > 0.0) {
        return Err(Error::Domain(format!("R = {r_min} must be positive")));
    }
    let (a, b) = (w.t_min, w.t_max);
    let w1 = 0.5 * (1.0 / a - 1.0 / b);
    let w2 = 10.0 * (a.powf(-0.5) - b.powf(-0.5));
    let w3 = 12.5 * (b / a).ln();
    let total = w1 + w2 + w3;
    let mut rng = crate::rng::stream(w.seed, &[0x4d_41_53_53], 0);
    let mut hits = 0usize;
    for _ in 0..w.samples {
        let u: f64 = rng.random::<f64>() * total;
        let v: f64 = rng.random();
        let t = if u < w1 {
            1.0 / (1.0 / a - v * (1.0 / a - 1.0 / b))
        } else if u < w1 + w2 {
            let s = a.powf(-0.5) - v * (a.powf(-0.5) - b.powf(-0.5));
            1.0 / (s * s)
        } else {
            a * (b / a).powf(v)
        };
        let rho = 1.0 + 5.0 * t.sqrt();
        let (rr, ang) = (rho * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let root = [rr * ang.cos(), rr * ang.sin()];
        let trace = bridge_forward(&mut rng, root, root, t, w.vertices.max(8));
        let bb = Rect::bounding(&trace).unwrap();
        // cheap rejections first
        let near = bb.x0 <= 1.0 && bb.x1 >= -1.0 && bb.y0 <= 1.0 && bb.y1 >= -1.0;
        if !near || bb.diagonal() < r_min || exact_diameter(&trace) < r_min {
            continue;
        }
        let cell = t.sqrt() / (w.vertices as f64).sqrt();
        let grid = Grid::covering(&bb.expand(2.0 * cell), cell);
        let mut ras = OccupancyRaster::new(grid);
        ras.add_polyline(&trace);
        let reach = 1.0 + cell * std::f64::consts::SQRT_2;
        if frontier(&ras).iter().any(|&i| {
            let c = grid.center(i);
            c[0].hypot(c[1]) <= reach
        }) {
            hits += 1;
        }
    }
    let n = w.samples.max(1) as f64;
    let p = hits as f64 / n;
    Ok(MassEstimate { value: total * p, stderr: total * (p * (1.0 - p) / n).sqrt(), hits })
}
