//! Disconnection decisions on annulus scenes.
//!
//! A scene is an obstacle raster on the cylinder `(theta, u)`; the circle
//! `C_u` is the row at height `u`. The raster extends from below the inner
//! circle `C_s` to a frame above `C_r`. Obstacles live in `u <= r`, so the top
//! row is connected to infinity whenever it is free.

use crate::clusters::{touching_clusters, ClusterSet};
use crate::error::{Error, Result};
use crate::geom::{angle_gap, to_log_polar, wrap_angle, P2, TAU};
use crate::raster::{Grid, OccupancyRaster};
use crate::sampler::Trace;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Distance between `C_r` and the frame row.
pub const FRAME_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusScene {
    pub raster: OccupancyRaster,
    pub s: f64,
    pub r: f64,
}

impl AnnulusScene {
    /// Empty scene with `width` angular cells; rows cover `[s - depth, r + 0.2]`.
    pub fn new(width: usize, s: f64, r: f64, depth: f64) -> Self {
        Self::with_frame(width, s, r, depth, FRAME_MARGIN)
    }

    pub fn with_frame(width: usize, s: f64, r: f64, depth: f64, margin: f64) -> Self {
        let grid = Grid::cylinder(width, s - depth, r + margin);
        AnnulusScene { raster: OccupancyRaster::new(grid), s, r }
    }

    pub fn on_grid(grid: Grid, s: f64, r: f64) -> Self {
        AnnulusScene { raster: OccupancyRaster::new(grid), s, r }
    }

    pub fn grid(&self) -> &Grid {
        &self.raster.grid
    }

    pub fn add_polyline(&mut self, pts: &[P2]) {
        self.raster.add_polyline(pts);
    }

    pub fn add_trace(&mut self, tr: &Trace) {
        for p in tr.pieces() {
            self.raster.add_polyline(p);
        }
    }

    /// Add a planar polyline (centered at the origin) after mapping it to the
    /// cylinder. Segments are subdivided so that consecutive image points are
    /// at most a quarter cell apart; points inside the inner hole of the
    /// raster are clamped to its bottom row.
    pub fn add_planar_polyline(&mut self, pts: &[P2]) {
        let g = *self.grid();
        let u_min = g.origin[1];
        let map = |z: P2| {
            let w = to_log_polar(z);
            [w[0], w[1].max(u_min)]
        };
        let mut out: Vec<P2> = Vec::new();
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let scale = (a[0].hypot(a[1]).min(b[0].hypot(b[1]))).max(u_min.exp());
            let n = ((len / (0.25 * g.cell * scale)).ceil() as usize).clamp(1, 200_000);
            for k in 0..=n {
                if k == 0 && !out.is_empty() {
                    continue;
                }
                let t = k as f64 / n as f64;
                let mut w = map([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                if let Some(prev) = out.last() {
                    // unwrap the angle
                    while w[0] - prev[0] > std::f64::consts::PI {
                        w[0] -= TAU;
                    }
                    while prev[0] - w[0] > std::f64::consts::PI {
                        w[0] += TAU;
                    }
                }
                out.push(w);
            }
        }
        if pts.len() == 1 {
            out.push(map(pts[0]));
        }
        self.raster.add_polyline(&out);
    }

    /// Row adjacent to `C_s`.
    pub fn inner_row(&self) -> usize {
        self.grid().row_of(self.s)
    }

    /// Scene file: the raster bitmap followed by `s` and `r` as `f64` (LE).
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        self.raster.write_bitmap(&mut w)?;
        w.write_all(&self.s.to_le_bytes())?;
        w.write_all(&self.r.to_le_bytes())?;
        Ok(())
    }

    pub fn read<R: Read>(mut rd: R) -> Result<Self> {
        let raster = OccupancyRaster::read_bitmap(&mut rd)?;
        let mut b = [0u8; 8];
        rd.read_exact(&mut b)?;
        let s = f64::from_le_bytes(b);
        rd.read_exact(&mut b)?;
        let r = f64::from_le_bytes(b);
        Ok(AnnulusScene { raster, s, r })
    }
}

/// Whether the obstacles separate `C_s` from infinity: no 4-connected path of
/// free cells joins the row of `C_s` to the frame row.
///
/// Returns a degenerate-scene error when the row of `C_s` is fully occupied.
pub fn disconnects(scene: &AnnulusScene) -> Result<bool> {
    let g = scene.grid();
    if !g.wrap_x {
        return Err(Error::DegenerateScene("scene raster must be periodic in angle".into()));
    }
    let row_s = scene.inner_row();
    let top = g.height - 1;
    if row_s >= top {
        return Err(Error::DegenerateScene("frame does not lie above C_s".into()));
    }
    let ras = &scene.raster;
    let w = g.width;
    if (0..w).all(|x| ras.get(g.index(x, row_s))) {
        return Err(Error::DegenerateScene("C_s is fully occupied".into()));
    }
    let mut seen = crate::raster::Bits::new(g.len());
    let mut stack: Vec<usize> = Vec::new();
    for x in 0..w {
        let i = g.index(x, top);
        if !ras.get(i) {
            seen.set(i);
            stack.push(i);
        }
    }
    let lo = row_s * w;
    let mut nb = [0usize; 4];
    while let Some(i) = stack.pop() {
        if i < lo + w {
            return Ok(false);
        }
        let n = g.neighbors4(i, &mut nb);
        for &j in &nb[..n] {
            if j >= lo && !seen.get(j) && !ras.get(j) {
                seen.set(j);
                stack.push(j);
            }
        }
    }
    Ok(true)
}

/// [`disconnects`] with a fully occupied `C_s` counted as disconnected.
pub fn disconnects_or_sealed(scene: &AnnulusScene) -> bool {
    disconnects(scene).unwrap_or(true)
}

/// Angular interval `[start, start + len)` (mod 2 pi) of a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

/// Maximal runs of free cells in the row of `C_u`.
pub fn free_segment_on_circle(scene: &AnnulusScene, u: f64) -> Vec<Arc> {
    let g = scene.grid();
    let y = g.row_of(u);
    let w = g.width;
    let free: Vec<bool> = (0..w).map(|x| !scene.raster.get(g.index(x, y))).collect();
    if free.iter().all(|&f| f) {
        return vec![Arc { start: 0.0, len: TAU }];
    }
    // start scanning just after an occupied cell so no run straddles the seam
    let s0 = (0..w).find(|&x| !free[x]).unwrap();
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for k in 1..=w {
        let x = (s0 + k) % w;
        if free[x] {
            run = Some(match run {
                None => (x, 1),
                Some((a, n)) => (a, n + 1),
            });
        } else if let Some((a, n)) = run.take() {
            out.push(Arc { start: g.origin[0] + a as f64 * g.cell, len: n as f64 * g.cell });
        }
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    out
}

/// Inputs of [`alpha_sep_predicate`].
#[derive(Debug, Clone)]
pub struct SepConfig<'a> {
    /// Crossings of `A(s, r)` in cylinder coordinates, each from `C_s` to `C_r`.
    pub traces: Vec<&'a [P2]>,
    /// Soup clusters on `grid` (log-polar, physical diameters), if any.
    pub clusters: Option<&'a ClusterSet>,
    pub grid: Grid,
    pub s: f64,
    pub r: f64,
    pub alpha: f64,
    /// Clusters near the circles must have diameter below `factor * alpha * e^s`
    /// (resp. `e^r`); `1/100` per the definition.
    pub cluster_factor: f64,
}

/// Which conditions of the separation event hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SepReport {
    pub landing: bool,
    pub confined: bool,
    pub small_clusters: bool,
    pub connected: bool,
}

impl SepReport {
    pub fn all(&self) -> bool {
        self.landing && self.confined && self.small_clusters && self.connected
    }
}

/// Landing zones: for each crossing, the arc of angular width `alpha` of
/// `C_s` centred at its start and the wedge `{e^v z : |v| <= alpha, z in arc}`;
/// likewise at `C_r` around its end point.
///
/// (i) landing arcs pairwise at distance `>= sqrt(alpha) e^s` on `C_s` and
/// `>= sqrt(alpha) e^r` on `C_r`; (ii) each crossing together with its
/// attached clusters stays in `A(s + alpha, r - alpha)` union its two wedges;
/// (iii) every cluster meeting `A(s, s + alpha)` has diameter below
/// `alpha e^s / 100`, and likewise near `C_r`; (iv) crossings, attached
/// clusters and wedges do not disconnect `C_s` from infinity.
pub fn alpha_sep_report(cfg: &SepConfig) -> SepReport {
    let (s, r, a) = (cfg.s, cfg.r, cfg.alpha);
    let g = cfg.grid;
    let starts: Vec<f64> = cfg.traces.iter().map(|t| t[0][0]).collect();
    let ends: Vec<f64> = cfg.traces.iter().map(|t| t[t.len() - 1][0]).collect();

    let separated = |angles: &[f64]| {
        for i in 0..angles.len() {
            for j in 0..i {
                let gap = (angle_gap(angles[i], angles[j]) - a).max(0.0);
                if 2.0 * (gap / 2.0).sin() < a.sqrt() {
                    return false;
                }
            }
        }
        true
    };
    let landing = separated(&starts) && separated(&ends);

    let in_zone = |p: P2, i: usize| {
        if p[1] > s + a && p[1] < r - a {
            return true;
        }
        if p[1] <= s + a && p[1] >= s - a && angle_gap(p[0], starts[i]) <= a / 2.0 {
            return true;
        }
        p[1] >= r - a && p[1] <= r + a && angle_gap(p[0], ends[i]) <= a / 2.0
    };

    let mut union = OccupancyRaster::new(g);
    let mut confined = true;
    for (i, t) in cfg.traces.iter().enumerate() {
        let mut own = OccupancyRaster::new(g);
        own.add_polyline(t);
        if !t.iter().all(|&p| in_zone(p, i)) {
            confined = false;
        }
        if let Some(cs) = cfg.clusters {
            for id in touching_clusters(&own, cs) {
                let cl = &cs.clusters[id];
                for &c in &cl.cells {
                    if !in_zone(g.center(c as usize), i) {
                        confined = false;
                    }
                    union.set(c as usize);
                }
            }
        }
        union.or_assign(&own);
    }

    let mut small_clusters = true;
    if let Some(cs) = cfg.clusters {
        for cl in &cs.clusters {
            let near_s = cl.bbox.y0 < s + a && cl.bbox.y1 > s;
            let near_r = cl.bbox.y0 < r && cl.bbox.y1 > r - a;
            if (near_s && cl.diameter >= cfg.cluster_factor * a * s.exp())
                || (near_r && cl.diameter >= cfg.cluster_factor * a * r.exp())
            {
                small_clusters = false;
                break;
            }
        }
    }

    // wedges
    for i in 0..cfg.traces.len() {
        for (centre, level) in [(starts[i], s), (ends[i], r)] {
            let y0 = g.row_of(level - a);
            let y1 = g.row_of(level + a);
            for y in y0..=y1 {
                for x in 0..g.width {
                    let idx = g.index(x, y);
                    let c = g.center(idx);
                    if angle_gap(c[0], centre) <= a / 2.0 {
                        union.set(idx);
                    }
                }
                // make sure the centre column is marked even if narrower than a cell
                if let Some(idx) = g.resolve(((wrap_angle(centre) - g.origin[0]) / g.cell).floor() as i64, y as i64) {
                    union.set(idx);
                }
            }
        }
    }
    let scene = AnnulusScene { raster: union, s, r };
    let connected = !disconnects_or_sealed(&scene);
    SepReport { landing, confined, small_clusters, connected }
}

pub fn alpha_sep_predicate(cfg: &SepConfig) -> bool {
    alpha_sep_report(cfg).all()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scene_is_connected() {
        let sc = AnnulusScene::new(64, 0.0, 2.0, 0.5);
        assert!(!disconnects(&sc).unwrap());
        let arcs = free_segment_on_circle(&sc, 1.0);
        assert_eq!(arcs.len(), 1);
        assert!((arcs[0].len - TAU).abs() < 1e-12);
    }

    #[test]
    fn full_ring_disconnects() {
        let mut sc = AnnulusScene::new(64, 0.0, 2.0, 0.5);
        sc.add_polyline(&[[0.0, 1.0], [TAU + 0.2, 1.0]]);
        assert!(disconnects(&sc).unwrap());
        // ring drawn as a planar circle of radius e
        let mut sc = AnnulusScene::new(128, 0.0, 2.0, 0.5);
        let e = 1f64.exp();
        let circle: Vec<P2> = (0..=100).map(|k| {
            let t = TAU * k as f64 / 100.0;
            [e * t.cos(), e * t.sin()]
        }).collect();
        sc.add_planar_polyline(&circle);
        assert!(disconnects(&sc).unwrap());
    }

    #[test]
    fn sealed_inner_circle_is_degenerate() {
        let mut sc = AnnulusScene::new(32, 0.0, 1.0, 0.5);
        let y = sc.inner_row();
        for x in 0..32 {
            sc.raster.set_xy(x, y);
        }
        assert!(matches!(disconnects(&sc), Err(Error::DegenerateScene(_))));
        assert!(disconnects_or_sealed(&sc));
    }

    #[test]
    fn opposite_wedges_leave_two_arcs() {
        let mut sc = AnnulusScene::new(128, 0.0, 2.0, 0.5);
        sc.add_polyline(&[[0.3, 0.0], [0.3, 2.0]]);
        sc.add_polyline(&[[0.3 + std::f64::consts::PI, 0.0], [0.3 + std::f64::consts::PI, 2.0]]);
        let arcs = free_segment_on_circle(&sc, 1.0);
        assert_eq!(arcs.len(), 2);
        let free: f64 = arcs.iter().map(|a| a.len).sum();
        let g = sc.grid();
        let y = g.row_of(1.0);
        let occ = (0..g.width).filter(|&x| sc.raster.get_xy(x, y)).count() as f64 * g.cell;
        assert!((free + occ - TAU).abs() < g.cell);
        assert!(!disconnects(&sc).unwrap());
    }

    #[test]
    fn frame_position_does_not_matter() {
        let mut a = AnnulusScene::with_frame(64, 0.0, 1.5, 0.5, 0.2);
        let mut b = AnnulusScene::with_frame(64, 0.0, 1.5, 0.5, 0.4);
        let arc = [[0.0, 0.5], [3.0, 1.4], [6.0, 0.7], [6.5, 0.3]];
        a.add_polyline(&arc);
        b.add_polyline(&arc);
        assert_eq!(disconnects(&a).unwrap(), disconnects(&b).unwrap());
    }

    #[test]
    fn straight_radial_crossing_is_separated() {
        let g = Grid::cylinder(128, -0.2, 2.2);
        let t: Vec<P2> = (0..=20).map(|k| [1.0, 2.0 * k as f64 / 20.0]).collect();
        let cfg = SepConfig {
            traces: vec![&t],
            clusters: None,
            grid: g,
            s: 0.0,
            r: 2.0,
            alpha: 0.1,
            cluster_factor: 0.01,
        };
        assert!(alpha_sep_predicate(&cfg));
    }

    #[test]
    fn close_landings_fail_separation() {
        let g = Grid::cylinder(128, -0.2, 2.2);
        let t1: Vec<P2> = (0..=20).map(|k| [1.0, 2.0 * k as f64 / 20.0]).collect();
        let t2: Vec<P2> = (0..=20).map(|k| [4.0 - 2.9 * k as f64 / 20.0, 2.0 * k as f64 / 20.0]).collect();
        let cfg = SepConfig {
            traces: vec![&t1, &t2],
            clusters: None,
            grid: g,
            s: 0.0,
            r: 2.0,
            alpha: 0.1,
            cluster_factor: 0.01,
        };
        let rep = alpha_sep_report(&cfg);
        assert!(!rep.landing);
        assert!(!alpha_sep_predicate(&cfg));
    }

    #[test]
    fn scene_file_round_trip() {
        let mut sc = AnnulusScene::new(40, 0.0, 1.0, 0.3);
        sc.add_polyline(&[[0.0, 0.0], [2.0, 0.9]]);
        let mut buf = Vec::new();
        sc.write(&mut buf).unwrap();
        assert_eq!(AnnulusScene::read(&buf[..]).unwrap(), sc);
    }
}
