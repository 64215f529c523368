//! Domains with known extremal distance.

use super::GridDomain;
use crate::geom::P2;
use crate::raster::{Bits, Grid};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Free,
    Arc1,
    Arc2,
    Wall,
}

/// Domain on `grid` from a classification of cell centres. Arc cells that do
/// not share a face with a free cell are dropped.
pub fn cartesian_domain(grid: Grid, class: impl Fn(P2) -> CellClass) -> GridDomain {
    let cls: Vec<CellClass> = (0..grid.len()).map(|i| class(grid.center(i))).collect();
    let mut free = Bits::new(grid.len());
    for (i, c) in cls.iter().enumerate() {
        if *c == CellClass::Free {
            free.set(i);
        }
    }
    let mut arc1 = Vec::new();
    let mut arc2 = Vec::new();
    let mut nb = [0usize; 4];
    for (i, c) in cls.iter().enumerate() {
        if matches!(c, CellClass::Arc1 | CellClass::Arc2) {
            let n = grid.neighbors4(i, &mut nb);
            if nb[..n].iter().any(|&j| free.get(j)) {
                if *c == CellClass::Arc1 {
                    arc1.push(i);
                } else {
                    arc2.push(i);
                }
            }
        }
    }
    GridDomain { grid, free, arc1, arc2 }
}

/// `(0, L) x (0, pi)` with the vertical sides marked; `across` cells span the
/// height and `ceil(across L / pi)` the length.
pub fn rectangle(l: f64, across: usize) -> GridDomain {
    let cell = PI / across as f64;
    let w = (across as f64 * l / PI - 1e-9).ceil().max(1.0) as usize;
    let grid = Grid::new([-cell, 0.0], cell, w + 2, across);
    cartesian_domain(grid, |p| {
        if p[0] < 0.0 {
            CellClass::Arc1
        } else if p[0] > w as f64 * cell {
            CellClass::Arc2
        } else {
            CellClass::Free
        }
    })
}

fn disk_grid(radius: f64, h: f64) -> Grid {
    let n = (radius / h).ceil() as i64 + 2;
    Grid::new([-(n as f64) * h, -(n as f64) * h], h, 2 * n as usize, 2 * n as usize)
}

/// Wedge `{z : s < log|z| < r, |arg z| < theta}` in plane coordinates with
/// cell `h`; arcs on the two circles.
pub fn cartesian_wedge(theta: f64, s: f64, r: f64, h: f64) -> GridDomain {
    cartesian_domain(disk_grid(r.exp(), h), |p| {
        let (lr, a) = (p[0].hypot(p[1]).ln(), p[1].atan2(p[0]));
        if a.abs() >= theta {
            CellClass::Wall
        } else if lr <= s {
            CellClass::Arc1
        } else if lr >= r {
            CellClass::Arc2
        } else {
            CellClass::Free
        }
    })
}

/// Annulus `{s < log|z| < r}` in plane coordinates between its two circles.
pub fn cartesian_annulus(s: f64, r: f64, h: f64) -> GridDomain {
    cartesian_domain(disk_grid(r.exp(), h), |p| {
        let lr = p[0].hypot(p[1]).ln();
        if lr <= s {
            CellClass::Arc1
        } else if lr >= r {
            CellClass::Arc2
        } else {
            CellClass::Free
        }
    })
}

/// Cylinder grid with one ghost row below `s` and above `r`; rows in between
/// are classified by `free(theta, u)`.
pub fn cylinder_band(width: usize, s: f64, r: f64, free: impl Fn(P2) -> bool) -> GridDomain {
    let grid = super::annulus_grid(width, s, r);
    let top = grid.height - 1;
    let mut f = Bits::new(grid.len());
    for y in 1..top {
        for x in 0..width {
            let i = grid.index(x, y);
            if free(grid.center(i)) {
                f.set(i);
            }
        }
    }
    let arc1 = (0..width).map(|x| grid.index(x, 0)).filter(|&i| f.get(i + width)).collect();
    let arc2 = (0..width).map(|x| grid.index(x, top)).filter(|&i| f.get(i - width)).collect();
    GridDomain { grid, free: f, arc1, arc2 }
}
