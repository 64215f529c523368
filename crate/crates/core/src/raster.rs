//! Occupancy rasters, supercover rasterization and flood fills.
//!
//! A raster is a `width x height` grid of square cells of side `cell` whose
//! lower-left corner sits at `origin`. Cell `(x, y)` has linear index
//! `y * width + x`. With `wrap_x` the x direction is periodic (used for the
//! angular coordinate of cylinder scenes).
//!
//! Occupied cells connect through 8-neighbours, free cells through
//! 4-neighbours.

use crate::error::{Error, Result};
use crate::geom::{Rect, P2, TAU};
use std::collections::VecDeque;
use std::io::{Read, Write};

/// Fixed-size bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn or_assign(&mut self, o: &Bits) {
        assert_eq!(self.len, o.len);
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
    }

    pub fn intersects(&self, o: &Bits) -> bool {
        self.words.iter().zip(&o.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, o: &Bits) -> bool {
        self.words.iter().zip(&o.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }
}

/// Raster geometry without the bits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub origin: P2,
    pub cell: f64,
    pub width: usize,
    pub height: usize,
    pub wrap_x: bool,
}

impl Grid {
    pub fn new(origin: P2, cell: f64, width: usize, height: usize) -> Self {
        Grid { origin, cell, width, height, wrap_x: false }
    }

    /// Planar grid covering `r` (rounded outwards to whole cells, origin on
    /// the lattice `cell * Z^2`).
    pub fn covering(r: &Rect, cell: f64) -> Self {
        let x0 = (r.x0 / cell).floor() * cell;
        let y0 = (r.y0 / cell).floor() * cell;
        let w = (((r.x1 - x0) / cell).floor() as usize + 1).max(1);
        let h = (((r.y1 - y0) / cell).floor() as usize + 1).max(1);
        Grid::new([x0, y0], cell, w, h)
    }

    /// Cylinder grid: `width` angular cells over `[0, 2 pi)`, rows from `u_lo`
    /// up to at least `u_hi`.
    pub fn cylinder(width: usize, u_lo: f64, u_hi: f64) -> Self {
        let cell = TAU / width as f64;
        let h = ((u_hi - u_lo) / cell).ceil().max(1.0) as usize;
        Grid { origin: [0.0, u_lo], cell, width, height: h, wrap_x: true }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn xy(&self, i: usize) -> (usize, usize) {
        (i % self.width, i / self.width)
    }

    /// Integer cell coordinates of a point, before bounds checks or wrapping.
    #[inline]
    pub fn raw_cell(&self, p: P2) -> (i64, i64) {
        (
            ((p[0] - self.origin[0]) / self.cell).floor() as i64,
            ((p[1] - self.origin[1]) / self.cell).floor() as i64,
        )
    }

    /// Index of raw cell `(x, y)`, wrapping x if periodic; `None` if outside.
    #[inline]
    pub fn resolve(&self, x: i64, y: i64) -> Option<usize> {
        if y < 0 || y >= self.height as i64 {
            return None;
        }
        let x = if self.wrap_x {
            x.rem_euclid(self.width as i64)
        } else if x < 0 || x >= self.width as i64 {
            return None;
        } else {
            x
        };
        Some(y as usize * self.width + x as usize)
    }

    pub fn cell_of(&self, p: P2) -> Option<usize> {
        let (x, y) = self.raw_cell(p);
        self.resolve(x, y)
    }

    pub fn center(&self, i: usize) -> P2 {
        let (x, y) = self.xy(i);
        [
            self.origin[0] + (x as f64 + 0.5) * self.cell,
            self.origin[1] + (y as f64 + 0.5) * self.cell,
        ]
    }

    /// Row containing height `v` (clamped to the grid).
    pub fn row_of(&self, v: f64) -> usize {
        let y = ((v - self.origin[1]) / self.cell).floor();
        (y.max(0.0) as usize).min(self.height - 1)
    }

    /// Lower edge of row `y`.
    pub fn row_lo(&self, y: usize) -> f64 {
        self.origin[1] + y as f64 * self.cell
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin[0],
            self.origin[1],
            self.origin[0] + self.width as f64 * self.cell,
            self.origin[1] + self.height as f64 * self.cell,
        )
    }

    /// 4-neighbours of cell `i` (periodic in x when configured).
    #[inline]
    pub fn neighbors4(&self, i: usize, out: &mut [usize; 4]) -> usize {
        let (x, y) = (i % self.width, i / self.width);
        let mut n = 0;
        if x > 0 {
            out[n] = i - 1;
            n += 1;
        } else if self.wrap_x {
            out[n] = i + self.width - 1;
            n += 1;
        }
        if x + 1 < self.width {
            out[n] = i + 1;
            n += 1;
        } else if self.wrap_x {
            out[n] = i + 1 - self.width;
            n += 1;
        }
        if y > 0 {
            out[n] = i - self.width;
            n += 1;
        }
        if y + 1 < self.height {
            out[n] = i + self.width;
            n += 1;
        }
        n
    }

    /// 8-neighbours of cell `i`.
    pub fn neighbors8(&self, i: usize, out: &mut [usize; 8]) -> usize {
        let (x, y) = self.xy(i);
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if let Some(j) = self.resolve(x as i64 + dx, y as i64 + dy) {
                    out[n] = j;
                    n += 1;
                }
            }
        }
        n
    }

    /// Whether cell `i` touches the raster frame (non-periodic sides only).
    pub fn on_frame(&self, i: usize) -> bool {
        let (x, y) = self.xy(i);
        y == 0 || y + 1 == self.height || (!self.wrap_x && (x == 0 || x + 1 == self.width))
    }
}

/// Boolean occupancy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyRaster {
    pub grid: Grid,
    pub bits: Bits,
}

impl OccupancyRaster {
    pub fn new(grid: Grid) -> Self {
        OccupancyRaster { bits: Bits::new(grid.len()), grid }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.bits.set(i)
    }

    pub fn get_xy(&self, x: usize, y: usize) -> bool {
        self.bits.get(self.grid.index(x, y))
    }

    pub fn set_xy(&mut self, x: usize, y: usize) {
        let i = self.grid.index(x, y);
        self.bits.set(i)
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn or_assign(&mut self, o: &OccupancyRaster) {
        assert_eq!(self.grid, o.grid, "rasters must share a grid");
        self.bits.or_assign(&o.bits);
    }

    pub fn add_polyline(&mut self, pts: &[P2]) {
        let g = self.grid;
        let bits = &mut self.bits;
        supercover_polyline(&g, pts, |i| bits.set(i));
    }

    /// Set every cell whose center lies in the given predicate.
    pub fn fill_where(&mut self, mut pred: impl FnMut(P2) -> bool) {
        for i in 0..self.grid.len() {
            if pred(self.grid.center(i)) {
                self.bits.set(i);
            }
        }
    }

    /// Compact binary form: magic `LSBM`, format version (u16), flags (u16,
    /// bit 0 = periodic x), width and height (u32), origin x, origin y, cell
    /// (f64), then the bits in row-major order packed LSB-first into
    /// `ceil(width*height/8)` bytes. All integers little-endian.
    pub fn write_bitmap<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        w.write_all(b"LSBM")?;
        w.write_all(&1u16.to_le_bytes())?;
        w.write_all(&(g.wrap_x as u16).to_le_bytes())?;
        w.write_all(&(g.width as u32).to_le_bytes())?;
        w.write_all(&(g.height as u32).to_le_bytes())?;
        for v in [g.origin[0], g.origin[1], g.cell] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut bytes = vec![0u8; g.len().div_ceil(8)];
        for i in self.bits.iter_ones() {
            bytes[i >> 3] |= 1 << (i & 7);
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_bitmap<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"LSBM" {
            return Err(Error::Format("bad bitmap magic".into()));
        }
        let mut b2 = [0u8; 2];
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b2)?;
        if u16::from_le_bytes(b2) != 1 {
            return Err(Error::Format("unsupported bitmap version".into()));
        }
        r.read_exact(&mut b2)?;
        let wrap_x = u16::from_le_bytes(b2) & 1 == 1;
        r.read_exact(&mut b4)?;
        let width = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let height = u32::from_le_bytes(b4) as usize;
        let mut f = [0.0; 3];
        for v in f.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        let grid = Grid { origin: [f[0], f[1]], cell: f[2], width, height, wrap_x };
        let mut bytes = vec![0u8; grid.len().div_ceil(8)];
        r.read_exact(&mut bytes)?;
        let mut out = OccupancyRaster::new(grid);
        for i in 0..grid.len() {
            if bytes[i >> 3] >> (i & 7) & 1 == 1 {
                out.set(i);
            }
        }
        Ok(out)
    }
}

/// Raster of a set of polylines at the given cell size, on a planar grid
/// covering their bounding box.
pub fn rasterize(polylines: &[&[P2]], cell: f64) -> OccupancyRaster {
    let mut bb: Option<Rect> = None;
    for pl in polylines {
        if let Some(r) = Rect::bounding(pl) {
            bb = Some(bb.map_or(r, |b| b.union(&r)));
        }
    }
    let grid = match bb {
        Some(b) => Grid::covering(&b, cell),
        None => Grid::new([0.0, 0.0], cell, 1, 1),
    };
    rasterize_on(grid, polylines)
}

/// Raster of polylines on a given grid; parts outside the grid are dropped.
pub fn rasterize_on(grid: Grid, polylines: &[&[P2]]) -> OccupancyRaster {
    let mut r = OccupancyRaster::new(grid);
    for pl in polylines {
        r.add_polyline(pl);
    }
    r
}

/// Call `f` on every in-grid cell met by the polyline (supercover).
pub fn supercover_polyline(g: &Grid, pts: &[P2], mut f: impl FnMut(usize)) {
    match pts.len() {
        0 => {}
        1 => {
            if let Some(i) = g.cell_of(pts[0]) {
                f(i)
            }
        }
        _ => {
            for w in pts.windows(2) {
                supercover_segment(g, w[0], w[1], &mut f);
            }
        }
    }
}

/// Grid traversal of one segment. When the segment passes exactly through a
/// cell corner both side cells are emitted.
pub fn supercover_segment(g: &Grid, a: P2, b: P2, f: &mut impl FnMut(usize)) {
    let fx0 = (a[0] - g.origin[0]) / g.cell;
    let fy0 = (a[1] - g.origin[1]) / g.cell;
    let fx1 = (b[0] - g.origin[0]) / g.cell;
    let fy1 = (b[1] - g.origin[1]) / g.cell;
    let (mut ix, mut iy) = (fx0.floor() as i64, fy0.floor() as i64);
    let (ex, ey) = (fx1.floor() as i64, fy1.floor() as i64);
    let mut emit = |x: i64, y: i64| {
        if let Some(i) = g.resolve(x, y) {
            f(i)
        }
    };
    emit(ix, iy);
    let dx = fx1 - fx0;
    let dy = fy1 - fy0;
    let sx: i64 = if dx > 0.0 { 1 } else { -1 };
    let sy: i64 = if dy > 0.0 { 1 } else { -1 };
    let tdx = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let tdy = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut tmx = if dx > 0.0 {
        (ix as f64 + 1.0 - fx0) * tdx
    } else if dx < 0.0 {
        (fx0 - ix as f64) * tdx
    } else {
        f64::INFINITY
    };
    let mut tmy = if dy > 0.0 {
        (iy as f64 + 1.0 - fy0) * tdy
    } else if dy < 0.0 {
        (fy0 - iy as f64) * tdy
    } else {
        f64::INFINITY
    };
    let max_steps = (ex - ix).unsigned_abs() + (ey - iy).unsigned_abs();
    let mut steps = 0u64;
    while (ix != ex || iy != ey) && steps < max_steps {
        let tie = tmx.is_finite() && tmy.is_finite() && (tmx - tmy).abs() <= 1e-12 * tmx.max(tmy).max(1.0);
        if tie {
            emit(ix + sx, iy);
            emit(ix, iy + sy);
            ix += sx;
            iy += sy;
            tmx += tdx;
            tmy += tdy;
            steps += 2;
        } else if tmx < tmy {
            ix += sx;
            tmx += tdx;
            steps += 1;
        } else {
            iy += sy;
            tmy += tdy;
            steps += 1;
        }
        emit(ix, iy);
    }
}

/// Breadth-first flood over cells for which `passable` holds, starting from
/// `seeds` (seeds that are not passable are skipped). 4-connectivity.
pub fn flood4(grid: &Grid, seeds: impl IntoIterator<Item = usize>, passable: impl Fn(usize) -> bool) -> Bits {
    let mut seen = Bits::new(grid.len());
    let mut q = VecDeque::new();
    for s in seeds {
        if passable(s) && !seen.get(s) {
            seen.set(s);
            q.push_back(s);
        }
    }
    let mut nb = [0usize; 4];
    while let Some(i) = q.pop_front() {
        let n = grid.neighbors4(i, &mut nb);
        for &j in &nb[..n] {
            if !seen.get(j) && passable(j) {
                seen.set(j);
                q.push_back(j);
            }
        }
    }
    seen
}

/// Free cells 4-connected to the raster frame. For periodic rasters the frame
/// is the top row only (the bottom row is the inner boundary).
pub fn exterior(r: &OccupancyRaster) -> Bits {
    let g = &r.grid;
    let seeds: Vec<usize> = if g.wrap_x {
        (0..g.width).map(|x| g.index(x, g.height - 1)).collect()
    } else {
        (0..g.len()).filter(|&i| g.on_frame(i)).collect()
    };
    flood4(g, seeds, |i| !r.get(i))
}

/// Occupied cells 8-adjacent to the exterior free component (or lying on the
/// frame of a non-periodic raster, whose outside counts as exterior).
pub fn frontier(r: &OccupancyRaster) -> Vec<usize> {
    let ext = exterior(r);
    let g = &r.grid;
    let mut nb = [0usize; 8];
    r.bits
        .iter_ones()
        .filter(|&i| {
            if !g.wrap_x && g.on_frame(i) {
                return true;
            }
            let n = g.neighbors8(i, &mut nb);
            nb[..n].iter().any(|&j| ext.get(j))
        })
        .collect()
}

/// Label 8-connected components of a cell set; returns the number of components.
pub fn count_components8(grid: &Grid, cells: &[usize]) -> usize {
    let mut member = Bits::new(grid.len());
    for &c in cells {
        member.set(c);
    }
    let mut seen = Bits::new(grid.len());
    let mut comps = 0;
    let mut nb = [0usize; 8];
    for &c in cells {
        if seen.get(c) {
            continue;
        }
        comps += 1;
        let mut stack = vec![c];
        seen.set(c);
        while let Some(i) = stack.pop() {
            let n = grid.neighbors8(i, &mut nb);
            for &j in &nb[..n] {
                if member.get(j) && !seen.get(j) {
                    seen.set(j);
                    stack.push(j);
                }
            }
        }
    }
    comps
}
