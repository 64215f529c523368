//! Dyadic squares visited by a loop and exposed on its outer boundary.
//!
//! `S_0 = [-1/16, 1/16]^2` is cut into `2^(n-3) x 2^(n-3)` squares of side
//! `2^-n`. A square `S` with centre `v` is visited `k` times when the loop
//! enters `S`, then reaches distance `2^-j - 2^-n / sqrt 2` from `v`, then
//! enters `S` again, and so on until `k` entries. It is a `(k, n)`-square if
//! in addition some point of `S` can be joined to infinity without crossing
//! the loop (or the soup clusters it touches).
//!
//! Loops are sampled from the cutoff loop measure restricted to loops that
//! meet `S_0`. Paths are resolved finely only near `S_0`; the outer boundary
//! is found by a flood over a fine raster of the box `[-1/8, 1/8]^2` glued to
//! a coarse raster of everything else.

use super::fit::{fit_exponent, fit_power_law, RadiusEstimate};
use crate::clusters::{build_clusters_on, touching_clusters};
use crate::error::{Error, Result};
use crate::geom::{Rect, P2};
use crate::raster::{Bits, Grid, OccupancyRaster};
use crate::rng::{stream, Stream};
use crate::sampler::{bridge_midpoint, sample_duration, sample_loop_soup, LoopSample, SoupConfig};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const S0_HALF: f64 = 1.0 / 16.0;
const BOX_HALF: f64 = 1.0 / 8.0;
/// Squares whose centre lies in `[-MID_HALF, MID_HALF]^2` enter the hitting statistics.
pub const MID_HALF: f64 = 1.0 / 32.0;
const SKELETON_LEVELS: u32 = 8;
/// Bridge pieces farther than this many standard deviations from a region
/// are treated as not reaching it.
const REACH_SD: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnConfig {
    pub j: u32,
    pub k: usize,
    pub n_values: Vec<u32>,
    /// Fine raster cell `2^-fine_exp` near `S_0`.
    pub fine_exp: u32,
    /// Coarse raster cell `2^-coarse_exp` elsewhere.
    pub coarse_exp: u32,
    /// Loop durations are drawn from `t^-2 dt` on `[t_lo, t_hi]`.
    pub t_lo: f64,
    pub t_hi: f64,
    /// Soup intensity and cutoffs for the surrounding soup.
    pub c: f64,
    pub soup_t_min: f64,
    pub soup_t_max: f64,
}

impl Default for KnConfig {
    fn default() -> Self {
        KnConfig {
            j: 4,
            k: 1,
            n_values: vec![8, 9, 10, 11],
            fine_exp: 13,
            coarse_exp: 10,
            t_lo: 1.0 / 16.0,
            t_hi: 1.0 / 4.0,
            c: 0.0,
            soup_t_min: 1e-4,
            soup_t_max: 0.25,
        }
    }
}

impl KnConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.j < 4 {
            bad.push(format!("j = {} below 4", self.j));
        }
        if self.k == 0 {
            bad.push("k must be at least 1".into());
        }
        if self.n_values.is_empty() {
            bad.push("n_values is empty".into());
        }
        for &n in &self.n_values {
            if n < self.j + 4 {
                bad.push(format!("n = {n} below j + 4 = {}", self.j + 4));
            }
        }
        if self.coarse_exp < 4 || self.coarse_exp > self.fine_exp {
            bad.push(format!("coarse_exp = {} must lie in [4, fine_exp]", self.coarse_exp));
        }
        if !(self.t_lo > 0.0 && self.t_hi > self.t_lo) {
            bad.push(format!("need 0 < t_lo < t_hi, got {} and {}", self.t_lo, self.t_hi));
        }
        if !(0.0..=1.0).contains(&self.c) {
            bad.push(format!("c = {} outside [0, 1]", self.c));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidConfig(bad));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| self.fine_exp < n + 1) {
            return Err(Error::Resolution(format!(
                "raster cell 2^-{} exceeds 2^-{} needed at n = {n}",
                self.fine_exp,
                n + 1
            )));
        }
        Ok(())
    }

    fn fine(&self) -> f64 {
        (-(self.fine_exp as f64)).exp2()
    }

    fn coarse(&self) -> f64 {
        (-(self.coarse_exp as f64)).exp2()
    }

    /// Half-side of the finely resolved box (a whole number of coarse cells).
    fn box_half(&self) -> f64 {
        BOX_HALF + 2.0 * self.coarse()
    }
}

/// One loop meeting `S_0` and the soup around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnScene {
    pub gamma: Vec<P2>,
    pub duration: f64,
    pub soup: Vec<LoopSample>,
}

fn in_s0(p: P2) -> bool {
    p[0].abs() <= S0_HALF && p[1].abs() <= S0_HALF
}

/// Distance from the segment's bounding box to the square `[-h, h]^2`.
fn box_gap(p: P2, q: P2, h: f64) -> f64 {
    let gx = (p[0].min(q[0]) - h).max(-h - p[0].max(q[0])).max(0.0);
    let gy = (p[1].min(q[1]) - h).max(-h - p[1].max(q[1])).max(0.0);
    gx.hypot(gy)
}

fn refine(rng: &mut Stream, p: P2, q: P2, d: f64, cfg: &KnConfig, out: &mut Vec<P2>) {
    let dt_c = (cfg.coarse() / 2.0).powi(2);
    let dt_f = (cfg.fine() / 2.0).powi(2);
    let near = box_gap(p, q, cfg.box_half()) <= REACH_SD * d.sqrt();
    if d > dt_c || (near && d > dt_f) {
        let sd = (d / 4.0).sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let m = [0.5 * (p[0] + q[0]) + sd * z0, 0.5 * (p[1] + q[1]) + sd * z1];
        refine(rng, p, m, d / 2.0, cfg, out);
        refine(rng, m, q, d / 2.0, cfg, out);
    } else {
        out.push(q);
    }
}

/// Loop from the cutoff measure conditioned to meet `S_0`: root uniform in a
/// box large enough to hold every root that can reach `S_0`, duration from
/// `t^-2`, rejected unless the loop visits `S_0`. Midpoint refinement stops
/// at the coarse scale away from `[-1/8, 1/8]^2`.
pub fn sample_kn_loop(cfg: &KnConfig, rng: &mut Stream) -> (Vec<P2>, f64) {
    let reach = S0_HALF + 5.0 * cfg.t_hi.sqrt();
    loop {
        let t = sample_duration(rng, cfg.t_lo, cfg.t_hi);
        let root = [reach * (2.0 * rng.random::<f64>() - 1.0), reach * (2.0 * rng.random::<f64>() - 1.0)];
        let skel = bridge_midpoint(rng, root, root, t, SKELETON_LEVELS);
        let d = t / (1u64 << SKELETON_LEVELS) as f64;
        if skel.windows(2).all(|w| box_gap(w[0], w[1], S0_HALF) > REACH_SD * d.sqrt()) {
            continue;
        }
        let mut pts = vec![skel[0]];
        for w in skel.windows(2) {
            refine(rng, w[0], w[1], d, cfg, &mut pts);
        }
        if pts.iter().any(|&p| in_s0(p)) {
            return (pts, t);
        }
    }
}

pub fn sample_kn_scene(cfg: &KnConfig, rng: &mut Stream) -> Result<KnScene> {
    let (gamma, duration) = sample_kn_loop(cfg, rng);
    let soup = if cfg.c > 0.0 {
        let bb = Rect::bounding(&gamma).unwrap().expand(2.0 * cfg.soup_t_max.sqrt());
        let sc = SoupConfig::plane(cfg.c, bb, cfg.soup_t_min, cfg.soup_t_max, 0);
        sample_loop_soup(&sc, rng)?
    } else {
        Vec::new()
    };
    Ok(KnScene { gamma, duration, soup })
}

/// Fine raster of the box and coarse raster of the plane around it.
struct TwoLevel {
    coarse: OccupancyRaster,
    fine: OccupancyRaster,
    ratio: usize,
    /// Coarse coordinates of the box's lower-left cell and its side in coarse cells.
    bx: usize,
    by: usize,
    side: usize,
}

impl TwoLevel {
    fn new(cfg: &KnConfig, extent: Rect) -> Self {
        let hc = cfg.coarse();
        let bh = cfg.box_half();
        let b = Rect::new(-bh, -bh, bh, bh);
        let coarse = Grid::covering(&extent.union(&b).expand(3.0 * hc), hc);
        let side = (2.0 * bh / hc).round() as usize;
        let (bx, by) = coarse.raw_cell([-bh + 0.5 * hc, -bh + 0.5 * hc]);
        let ratio = 1usize << (cfg.fine_exp - cfg.coarse_exp);
        let fine = Grid::new([-bh, -bh], cfg.fine(), side * ratio, side * ratio);
        TwoLevel {
            coarse: OccupancyRaster::new(coarse),
            fine: OccupancyRaster::new(fine),
            ratio,
            bx: bx as usize,
            by: by as usize,
            side,
        }
    }

    fn add(&mut self, pts: &[P2]) {
        self.coarse.add_polyline(pts);
        self.fine.add_polyline(pts);
    }

    fn in_box(&self, x: usize, y: usize) -> bool {
        x >= self.bx && x < self.bx + self.side && y >= self.by && y < self.by + self.side
    }

    /// Fine cells joined to the outer frame of the coarse raster by free cells.
    fn exterior(&self) -> Bits {
        #[derive(Clone, Copy)]
        enum Cell {
            C(usize),
            F(usize),
        }
        let cg = self.coarse.grid;
        let fg = self.fine.grid;
        let mut seen_c = Bits::new(cg.len());
        let mut seen_f = Bits::new(fg.len());
        let mut q = VecDeque::new();
        for i in 0..cg.len() {
            if cg.on_frame(i) && !self.coarse.get(i) {
                seen_c.set(i);
                q.push_back(Cell::C(i));
            }
        }
        let mut nb = [0usize; 4];
        while let Some(c) = q.pop_front() {
            match c {
                Cell::C(i) => {
                    let (x, y) = cg.xy(i);
                    let n = cg.neighbors4(i, &mut nb);
                    for &j in &nb[..n] {
                        let (jx, jy) = cg.xy(j);
                        if self.in_box(jx, jy) {
                            // fine cells of `j` along the shared edge
                            let fx0 = (jx - self.bx) * self.ratio;
                            let fy0 = (jy - self.by) * self.ratio;
                            for t in 0..self.ratio {
                                let (fx, fy) = if jx > x {
                                    (fx0, fy0 + t)
                                } else if jx < x {
                                    (fx0 + self.ratio - 1, fy0 + t)
                                } else if jy > y {
                                    (fx0 + t, fy0)
                                } else {
                                    (fx0 + t, fy0 + self.ratio - 1)
                                };
                                let f = fg.index(fx, fy);
                                if !self.fine.get(f) && !seen_f.get(f) {
                                    seen_f.set(f);
                                    q.push_back(Cell::F(f));
                                }
                            }
                        } else if !self.coarse.get(j) && !seen_c.get(j) {
                            seen_c.set(j);
                            q.push_back(Cell::C(j));
                        }
                    }
                }
                Cell::F(f) => {
                    let n = fg.neighbors4(f, &mut nb);
                    for &g in &nb[..n] {
                        if !self.fine.get(g) && !seen_f.get(g) {
                            seen_f.set(g);
                            q.push_back(Cell::F(g));
                        }
                    }
                    let (fx, fy) = fg.xy(f);
                    let cx = self.bx + fx / self.ratio;
                    let cy = self.by + fy / self.ratio;
                    let mut out = |x: usize, y: usize| {
                        let j = cg.index(x, y);
                        if !self.coarse.get(j) && !seen_c.get(j) {
                            seen_c.set(j);
                            q.push_back(Cell::C(j));
                        }
                    };
                    if fx == 0 {
                        out(cx - 1, cy);
                    }
                    if fx + 1 == fg.width {
                        out(cx + 1, cy);
                    }
                    if fy == 0 {
                        out(cx, cy - 1);
                    }
                    if fy + 1 == fg.height {
                        out(cx, cy + 1);
                    }
                }
            }
        }
        seen_f
    }
}

/// Bounding boxes of consecutive blocks of vertices at several block sizes,
/// for "does the path get at least `R` away from `v` between two times".
struct FarIndex<'a> {
    pts: &'a [P2],
    levels: Vec<(usize, Vec<Rect>)>,
}

impl<'a> FarIndex<'a> {
    fn new(pts: &'a [P2]) -> Self {
        let mut levels = Vec::new();
        let mut size = 64;
        let mut prev: Option<Vec<Rect>> = None;
        while size < pts.len() {
            let boxes: Vec<Rect> = match &prev {
                None => pts.chunks(size).map(|c| Rect::bounding(c).unwrap()).collect(),
                Some(p) => p.chunks(64).map(|c| c.iter().skip(1).fold(c[0], |a, b| a.union(b))).collect(),
            };
            levels.push((size, boxes.clone()));
            prev = Some(boxes);
            size *= 64;
        }
        FarIndex { pts, levels }
    }

    fn far_corner(b: &Rect, v: P2) -> f64 {
        let dx = (v[0] - b.x0).abs().max((b.x1 - v[0]).abs());
        let dy = (v[1] - b.y0).abs().max((b.y1 - v[1]).abs());
        dx.hypot(dy)
    }

    /// Whether some vertex with index in `[a, b)` is at distance `>= r` from `v`.
    fn any_far(&self, a: usize, b: usize, v: P2, r: f64) -> bool {
        let mut m = a;
        'outer: while m < b {
            for (size, boxes) in self.levels.iter().rev() {
                if m % size == 0 && m + size <= b {
                    if Self::far_corner(&boxes[m / size], v) < r {
                        m += size;
                        continue 'outer;
                    }
                }
            }
            let p = self.pts[m];
            if (p[0] - v[0]).hypot(p[1] - v[1]) >= r {
                return true;
            }
            m += 1;
        }
        false
    }
}

/// Per-square visit counting along the trace; returns a flag per square
/// (row-major, `2^(n-3)` per side) for squares visited `k` times.
fn visited_squares(pts: &[P2], far: &FarIndex, n: u32, j: u32, k: usize) -> Vec<bool> {
    let per = 1usize << (n - 3);
    let side = (-(n as f64)).exp2();
    let radius = (-(j as f64)).exp2() - side / std::f64::consts::SQRT_2;
    let mut visits = vec![0usize; per * per];
    let mut last = vec![usize::MAX; per * per];
    for (idx, &p) in pts.iter().enumerate() {
        if !in_s0(p) {
            continue;
        }
        let sx = (((p[0] + S0_HALF) / side) as usize).min(per - 1);
        let sy = (((p[1] + S0_HALF) / side) as usize).min(per - 1);
        let s = sy * per + sx;
        if visits[s] >= k {
            continue;
        }
        if visits[s] == 0 {
            visits[s] = 1;
        } else if idx > last[s] + 1 {
            let v = [-S0_HALF + (sx as f64 + 0.5) * side, -S0_HALF + (sy as f64 + 0.5) * side];
            if far.any_far(last[s] + 1, idx, v, radius) {
                visits[s] += 1;
            }
        }
        last[s] = idx;
    }
    visits.into_iter().map(|c| c >= k).collect()
}

/// Counts for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareCountReport {
    pub j: u32,
    pub k: usize,
    pub n_values: Vec<u32>,
    /// Number of `(k, n)`-squares per `n`.
    pub counts: Vec<u64>,
    /// Squares visited `k` times, exposed or not.
    pub visited: Vec<u64>,
    /// Visited squares among the central ones.
    pub mid_visited: Vec<u64>,
    pub mid_total: Vec<u64>,
    /// Slope of `log2 counts` against `n` (`NaN` if some count is zero).
    pub dimension: f64,
    pub stderr: f64,
}

pub fn count_kn_squares(cfg: &KnConfig, scene: &KnScene) -> Result<SquareCountReport> {
    cfg.validate()?;
    let mut extent = Rect::bounding(&scene.gamma).ok_or_else(|| Error::Domain("empty loop".into()))?;
    let mut extra: Vec<&[P2]> = Vec::new();
    if !scene.soup.is_empty() {
        for l in &scene.soup {
            extent = extent.union(&l.bbox());
        }
        let grid = Grid::covering(&extent.expand(3.0 * cfg.coarse()), cfg.coarse());
        let cs = build_clusters_on(&scene.soup, grid, Default::default());
        let mut seed = OccupancyRaster::new(grid);
        seed.add_polyline(&scene.gamma);
        for id in touching_clusters(&seed, &cs) {
            for &m in &cs.clusters[id].members {
                extra.push(&scene.soup[m].trace);
            }
        }
    }
    let mut tl = TwoLevel::new(cfg, extent);
    tl.add(&scene.gamma);
    for t in &extra {
        tl.add(t);
    }
    let ext = tl.exterior();
    let fg = tl.fine.grid;
    // cells in the closure of the exterior: exterior cells and occupied
    // cells sharing an edge with one
    let mut touch = ext.clone();
    let mut nb = [0usize; 4];
    for i in tl.fine.bits.iter_ones() {
        let n = fg.neighbors4(i, &mut nb);
        if nb[..n].iter().any(|&j| ext.get(j)) {
            touch.set(i);
        }
    }
    let far = FarIndex::new(&scene.gamma);

    let mut rep = SquareCountReport {
        j: cfg.j,
        k: cfg.k,
        n_values: cfg.n_values.clone(),
        counts: Vec::new(),
        visited: Vec::new(),
        mid_visited: Vec::new(),
        mid_total: Vec::new(),
        dimension: f64::NAN,
        stderr: f64::NAN,
    };
    // fine cells of S_0
    let off = ((cfg.box_half() - S0_HALF) / cfg.fine()).round() as usize;
    let s0_cells = 1usize << (cfg.fine_exp - 3);
    for &n in &cfg.n_values {
        let per = 1usize << (n - 3);
        let cells = 1usize << (cfg.fine_exp - n);
        let hit = visited_squares(&scene.gamma, &far, n, cfg.j, cfg.k);
        let mut exposed = vec![false; per * per];
        for fy in 0..s0_cells {
            for fx in 0..s0_cells {
                if touch.get(fg.index(off + fx, off + fy)) {
                    exposed[(fy / cells) * per + fx / cells] = true;
                }
            }
        }
        let side = (-(n as f64)).exp2();
        let mut mid_total = 0;
        let mut mid_hit = 0;
        for sy in 0..per {
            for sx in 0..per {
                let c = [-S0_HALF + (sx as f64 + 0.5) * side, -S0_HALF + (sy as f64 + 0.5) * side];
                if c[0].abs() <= MID_HALF && c[1].abs() <= MID_HALF {
                    mid_total += 1;
                    mid_hit += hit[sy * per + sx] as u64;
                }
            }
        }
        rep.counts.push(hit.iter().zip(&exposed).filter(|(h, e)| **h && **e).count() as u64);
        rep.visited.push(hit.iter().filter(|h| **h).count() as u64);
        rep.mid_visited.push(mid_hit);
        rep.mid_total.push(mid_total);
    }
    if rep.n_values.len() >= 3 && rep.counts.iter().all(|&c| c > 0) {
        let pts: Vec<_> =
            rep.n_values.iter().zip(&rep.counts).map(|(&n, &c)| RadiusEstimate::point(n as f64, c as f64, 0.0)).collect();
        let f = fit_exponent(&pts)?;
        rep.dimension = -f.slope / std::f64::consts::LN_2;
        rep.stderr = f.stderr / std::f64::consts::LN_2;
    }
    Ok(rep)
}

/// Averages over many independent scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub config: KnConfig,
    pub loops: u64,
    pub n_values: Vec<u32>,
    pub mean_counts: Vec<f64>,
    pub count_stderr: Vec<f64>,
    /// `log2` slope of the mean count against `n`.
    pub dimension: f64,
    pub dimension_stderr: f64,
    /// Mean fraction of central squares visited `k` times.
    pub hit_probability: Vec<f64>,
    pub hit_stderr: Vec<f64>,
    /// Log-log slope of the hitting probability against `n`.
    pub hitting_slope: f64,
    pub hitting_stderr: f64,
    /// `P(S is a (k, n)-square) 2^(n xi)` for the supplied exponent `xi`.
    pub first_moment: Vec<f64>,
}

#[derive(Clone, Default)]
struct Sums {
    count: Vec<u128>,
    count_sq: Vec<u128>,
    mid: Vec<u128>,
    mid_sq: Vec<u128>,
}

impl Sums {
    fn merge(mut self, o: Sums) -> Sums {
        if self.count.is_empty() {
            return o;
        }
        if o.count.is_empty() {
            return self;
        }
        for i in 0..self.count.len() {
            self.count[i] += o.count[i];
            self.count_sq[i] += o.count_sq[i];
            self.mid[i] += o.mid[i];
            self.mid_sq[i] += o.mid_sq[i];
        }
        self
    }
}

/// Run `loops` independent scenes (scene `i` uses stream `i` under `seed`)
/// and fit the count and hitting slopes; `xi` scales the first-moment column.
pub fn dimension_campaign(cfg: &KnConfig, loops: u64, seed: u64, xi: f64) -> Result<DimensionReport> {
    cfg.validate()?;
    if loops < 3 {
        return Err(Error::InvalidConfig(vec![format!("loops = {loops} below 3")]));
    }
    let sums = (0..loops)
        .into_par_iter()
        .map(|i| -> Result<Sums> {
            let mut rng = stream(seed, &[0x6b6e, cfg.k as u64, cfg.j as u64], i);
            let scene = sample_kn_scene(cfg, &mut rng)?;
            let r = count_kn_squares(cfg, &scene)?;
            let sq = |v: &[u64]| v.iter().map(|&x| (x as u128) * (x as u128)).collect::<Vec<u128>>();
            Ok(Sums {
                count: r.counts.iter().map(|&x| x as u128).collect(),
                count_sq: sq(&r.counts),
                mid: r.mid_visited.iter().map(|&x| x as u128).collect(),
                mid_sq: sq(&r.mid_visited),
            })
        })
        .try_reduce(Sums::default, |a, b| Ok(a.merge(b)))?;
    let l = loops as f64;
    let mut rep = DimensionReport {
        config: cfg.clone(),
        loops,
        n_values: cfg.n_values.clone(),
        mean_counts: Vec::new(),
        count_stderr: Vec::new(),
        dimension: f64::NAN,
        dimension_stderr: f64::NAN,
        hit_probability: Vec::new(),
        hit_stderr: Vec::new(),
        hitting_slope: f64::NAN,
        hitting_stderr: f64::NAN,
        first_moment: Vec::new(),
    };
    let mut count_pts = Vec::new();
    let mut hit_pts = Vec::new();
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let m = sums.count[i] as f64 / l;
        let var = ((sums.count_sq[i] as f64 / l - m * m).max(0.0)) / l;
        rep.mean_counts.push(m);
        rep.count_stderr.push(var.sqrt());
        count_pts.push(RadiusEstimate::point(n as f64, m, var));
        let per = 1u64 << (n - 3);
        let mid_total = (per / 2) * (per / 2);
        let t = mid_total as f64;
        let h = sums.mid[i] as f64 / l / t;
        let hv = ((sums.mid_sq[i] as f64 / l / (t * t) - h * h).max(0.0)) / l;
        rep.hit_probability.push(h);
        rep.hit_stderr.push(hv.sqrt());
        hit_pts.push(RadiusEstimate::point(n as f64, h, hv));
        let total = (1u64 << (2 * (n - 3))) as f64;
        rep.first_moment.push(m / total * (n as f64 * xi).exp2());
    }
    if count_pts.len() >= 3 && count_pts.iter().all(|p| p.estimate > 0.0) {
        let f = fit_exponent(&count_pts)?;
        rep.dimension = -f.slope / std::f64::consts::LN_2;
        rep.dimension_stderr = f.stderr / std::f64::consts::LN_2;
    }
    if hit_pts.len() >= 3 && hit_pts.iter().all(|p| p.estimate > 0.0) {
        let f = fit_power_law(&hit_pts)?;
        rep.hitting_slope = f.slope;
        rep.hitting_stderr = f.stderr;
    }
    Ok(rep)
}
