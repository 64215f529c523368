//! Discrete pi-extremal distance.
//!
//! For a free region `O` with marked boundary arcs `V1`, `V2`, the distance is
//! `L = pi / E` where `E` is the Dirichlet energy of the harmonic function equal
//! to 0 on `V1`, 1 on `V2` and with zero flux through the rest of the boundary.
//! On a grid, free cells are unit resistor nodes; arc cells sit half a cell
//! behind their shared faces (conductance 2).

pub mod annulus;
pub mod builders;
pub mod solver;

use crate::error::{Error, Result};
use crate::raster::{Bits, Grid, OccupancyRaster};
use serde::{Deserialize, Serialize};
use solver::{energy, free_components, solve, Node, SolverOptions};
use std::f64::consts::PI;
use std::io::{Read, Write};

pub use annulus::{
    annulus_grid, avoidance_probability, excursion_obstacles, excursion_pair_extremal, pair_extremal_on,
    PairExtremal,
};
pub use builders::{cartesian_annulus, cartesian_domain, cartesian_wedge, cylinder_band, rectangle, CellClass};

/// Extremal distance, with `Infinite` when the arcs are not connected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn from_energy(e: f64) -> Self {
        if e > 0.0 {
            Distance::Finite(PI / e)
        } else {
            Distance::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Distance::Finite(v) => Some(v),
            Distance::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Distance::Infinite)
    }

    /// `exp(-lambda L)`, exactly 0 for an infinite distance.
    pub fn tilt(self, lambda: f64) -> f64 {
        match self {
            Distance::Finite(v) => (-lambda * v).exp(),
            Distance::Infinite => 0.0,
        }
    }

    pub fn min(self, o: Distance) -> Distance {
        match (self, o) {
            (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a.min(b)),
            (Distance::Infinite, x) | (x, Distance::Infinite) => x,
        }
    }

    /// `self <= o + tol`.
    pub fn le(self, o: Distance, tol: f64) -> bool {
        match (self, o) {
            (_, Distance::Infinite) => true,
            (Distance::Infinite, Distance::Finite(_)) => false,
            (Distance::Finite(a), Distance::Finite(b)) => a <= b + tol,
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Finite(v) => write!(f, "{v}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

/// Free region and two boundary arcs on a grid. Arc cells are not free and
/// must each share a face with the free region to take part.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    pub grid: Grid,
    pub free: Bits,
    pub arc1: Vec<usize>,
    pub arc2: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResult {
    /// `pi / dirichlet_energy` on the finest grid.
    pub value: Distance,
    pub dirichlet_energy: f64,
    pub grid_levels_used: usize,
    /// `|L(h) - L(2h)|` for first-order convergence; `NaN` with one level.
    pub richardson_error_estimate: f64,
    /// `2 L(h) - L(2h)` when two levels are available, else `value`.
    pub extrapolated: Distance,
    pub iterations: usize,
}

impl GridDomain {
    pub fn validate(&self) -> Result<()> {
        if self.grid.wrap_x && self.grid.width < 3 {
            return Err(Error::DegenerateArc("periodic domains need at least 3 columns".into()));
        }
        if self.free.len() != self.grid.len() {
            return Err(Error::DegenerateArc("free mask does not match the grid".into()));
        }
        let mut mark = vec![0u8; self.grid.len()];
        for (k, arc) in [(1u8, &self.arc1), (2u8, &self.arc2)] {
            if arc.is_empty() {
                return Err(Error::DegenerateArc(format!("arc {k} is empty")));
            }
            for &i in arc.iter() {
                if i >= self.grid.len() {
                    return Err(Error::DegenerateArc(format!("arc {k} cell {i} outside the grid")));
                }
                if self.free.get(i) {
                    return Err(Error::DegenerateArc(format!("arc {k} cell {i} is free")));
                }
                if mark[i] != 0 && mark[i] != k {
                    return Err(Error::DegenerateArc(format!("cell {i} lies on both arcs")));
                }
                mark[i] = k;
            }
            let mut nb = [0usize; 4];
            let touches = arc.iter().any(|&i| {
                let n = self.grid.neighbors4(i, &mut nb);
                nb[..n].iter().any(|&j| self.free.get(j))
            });
            if !touches {
                return Err(Error::DegenerateArc(format!("arc {k} does not touch the free region")));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes: Vec<Node> =
            (0..self.grid.len()).map(|i| if self.free.get(i) { Node::Free } else { Node::Wall }).collect();
        for &i in &self.arc1 {
            nodes[i] = Node::Fixed { value: 0.0, conductance: 2.0 };
        }
        for &i in &self.arc2 {
            nodes[i] = Node::Fixed { value: 1.0, conductance: 2.0 };
        }
        nodes
    }

    pub fn swapped(&self) -> GridDomain {
        GridDomain { grid: self.grid, free: self.free.clone(), arc1: self.arc2.clone(), arc2: self.arc1.clone() }
    }

    /// Same domain on a grid of twice the cell size: a coarse cell joins an arc
    /// when one of its children does (arc 1 first), and is otherwise free when
    /// at least two of its four children are. `None` when the coarse domain
    /// is degenerate.
    pub fn coarsen(&self) -> Option<GridDomain> {
        let g = self.grid;
        if g.wrap_x && g.width % 2 == 1 {
            return None;
        }
        let cg = Grid {
            origin: g.origin,
            cell: 2.0 * g.cell,
            width: g.width.div_ceil(2),
            height: g.height.div_ceil(2),
            wrap_x: g.wrap_x,
        };
        let mut mark = vec![0u8; g.len()];
        for &i in &self.arc1 {
            mark[i] = 1;
        }
        for &i in &self.arc2 {
            if mark[i] == 0 {
                mark[i] = 2;
            }
        }
        let mut free = Bits::new(cg.len());
        let mut cmark = vec![0u8; cg.len()];
        for cy in 0..cg.height {
            for cx in 0..cg.width {
                let mut nfree = 0;
                let mut m = 0u8;
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let (x, y) = (2 * cx + dx, 2 * cy + dy);
                    if x < g.width && y < g.height {
                        let i = g.index(x, y);
                        nfree += self.free.get(i) as usize;
                        if mark[i] != 0 && (m == 0 || mark[i] < m) {
                            m = mark[i];
                        }
                    }
                }
                let ci = cg.index(cx, cy);
                if m != 0 {
                    cmark[ci] = m;
                } else if nfree >= 2 {
                    free.set(ci);
                }
            }
        }
        let mut nb = [0usize; 4];
        let mut arc1 = Vec::new();
        let mut arc2 = Vec::new();
        for ci in 0..cg.len() {
            if cmark[ci] == 0 {
                continue;
            }
            let n = cg.neighbors4(ci, &mut nb);
            if nb[..n].iter().any(|&j| free.get(j)) {
                if cmark[ci] == 1 {
                    arc1.push(ci);
                } else {
                    arc2.push(ci);
                }
            }
        }
        let d = GridDomain { grid: cg, free, arc1, arc2 };
        d.validate().ok().map(|_| d)
    }

    /// Free region as an occupancy raster (set bits are free cells).
    pub fn free_raster(&self) -> OccupancyRaster {
        OccupancyRaster { grid: self.grid, bits: self.free.clone() }
    }

    /// Bitmap of the free cells followed by nothing; the arcs go to a JSON
    /// sidecar `{"arc1": [...], "arc2": [...]}` of cell indices.
    pub fn write<W: Write, S: Write>(&self, bitmap: W, sidecar: S) -> Result<()> {
        self.free_raster().write_bitmap(bitmap)?;
        serde_json::to_writer(sidecar, &ArcSidecar { arc1: self.arc1.clone(), arc2: self.arc2.clone() })?;
        Ok(())
    }

    pub fn read<R: Read, S: Read>(bitmap: R, sidecar: S) -> Result<GridDomain> {
        let ras = OccupancyRaster::read_bitmap(bitmap)?;
        let arcs: ArcSidecar = serde_json::from_reader(sidecar)?;
        let d = GridDomain { grid: ras.grid, free: ras.bits, arc1: arcs.arc1, arc2: arcs.arc2 };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Serialize, Deserialize)]
struct ArcSidecar {
    arc1: Vec<usize>,
    arc2: Vec<usize>,
}

/// Single-level solve: `(distance, energy, iterations)`.
pub fn solve_level(dom: &GridDomain, opts: SolverOptions) -> Result<(Distance, f64, usize)> {
    dom.validate()?;
    let nodes = dom.nodes();
    let sol = solve(&dom.grid, &nodes, None, opts)?;
    let e = energy(&dom.grid, &nodes, &sol.potential);
    Ok((Distance::from_energy(e), e, sol.iterations))
}

/// Extremal distance on the domain's own grid, without extrapolation.
pub fn extremal_distance_single(dom: &GridDomain) -> Result<ExtremalResult> {
    let (value, e, it) = solve_level(dom, SolverOptions::default())?;
    Ok(ExtremalResult {
        value,
        dirichlet_energy: e,
        grid_levels_used: 1,
        richardson_error_estimate: f64::NAN,
        extrapolated: value,
        iterations: it,
    })
}

fn combine(fine: (Distance, f64, usize), coarse: Option<Distance>) -> ExtremalResult {
    let (value, e, it) = fine;
    match (value, coarse) {
        (Distance::Finite(f), Some(Distance::Finite(c))) => ExtremalResult {
            value,
            dirichlet_energy: e,
            grid_levels_used: 2,
            richardson_error_estimate: (f - c).abs(),
            extrapolated: Distance::Finite(2.0 * f - c),
            iterations: it,
        },
        _ => ExtremalResult {
            value,
            dirichlet_energy: e,
            grid_levels_used: 1,
            richardson_error_estimate: f64::NAN,
            extrapolated: value,
            iterations: it,
        },
    }
}

/// Extremal distance with a Richardson estimate from the coarsened domain.
pub fn extremal_distance(dom: &GridDomain) -> Result<ExtremalResult> {
    let fine = solve_level(dom, SolverOptions::default())?;
    let coarse = dom.coarsen().and_then(|c| solve_level(&c, SolverOptions::default()).ok()).map(|r| r.0);
    Ok(combine(fine, coarse))
}

/// Extremal distance of a family of discretizations: `build(0)` is the finest
/// level and `build(1)` the same domain at twice the cell size.
pub fn extremal_distance_levels(build: impl Fn(usize) -> GridDomain) -> Result<ExtremalResult> {
    let fine = solve_level(&build(0), SolverOptions::default())?;
    let coarse = solve_level(&build(1), SolverOptions::default()).ok().map(|r| r.0);
    Ok(combine(fine, coarse))
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut bs = b.to_vec();
    bs.sort_unstable();
    a.iter().all(|x| bs.binary_search(x).is_ok())
}

/// Whether enlarging the domain and its arcs did not increase the distance.
/// Requires `dom.free ⊆ enlarged.free` and each arc of `dom` contained in the
/// corresponding arc of `enlarged`.
pub fn check_comparison_principle(dom: &GridDomain, enlarged: &GridDomain, tol: f64) -> Result<bool> {
    if dom.grid != enlarged.grid {
        return Err(Error::Domain("domains must share a grid".into()));
    }
    if !dom.free.is_subset_of(&enlarged.free) || !is_subset(&dom.arc1, &enlarged.arc1) || !is_subset(&dom.arc2, &enlarged.arc2) {
        return Err(Error::Domain("second domain does not enlarge the first".into()));
    }
    let (a, _, _) = solve_level(dom, SolverOptions::default())?;
    let (b, _, _) = solve_level(enlarged, SolverOptions::default())?;
    Ok(b.le(a, tol))
}

/// Split a domain along a crosscut of free cells: the part reaching arc 1
/// (with the crosscut as its second arc) and the part reaching arc 2.
pub fn split_along(dom: &GridDomain, crosscut: &[usize]) -> Result<(GridDomain, GridDomain)> {
    dom.validate()?;
    let g = dom.grid;
    let mut nodes = dom.nodes();
    for &i in crosscut {
        if !dom.free.get(i) {
            return Err(Error::Domain(format!("crosscut cell {i} is not free")));
        }
        nodes[i] = Node::Wall;
    }
    let (comp, ncomp) = free_components(&g, &nodes);
    let mut touch = vec![[false; 2]; ncomp];
    let mut nb = [0usize; 4];
    for (k, arc) in [&dom.arc1, &dom.arc2].into_iter().enumerate() {
        for &i in arc {
            let n = g.neighbors4(i, &mut nb);
            for &j in &nb[..n] {
                if comp[j] != u32::MAX {
                    touch[comp[j] as usize][k] = true;
                }
            }
        }
    }
    if touch.iter().any(|t| t[0] && t[1]) {
        return Err(Error::Domain("crosscut does not separate the arcs".into()));
    }
    let mut f1 = Bits::new(g.len());
    let mut f2 = Bits::new(g.len());
    for i in 0..g.len() {
        if comp[i] != u32::MAX {
            let t = touch[comp[i] as usize];
            if t[0] {
                f1.set(i);
            } else if t[1] {
                f2.set(i);
            }
        }
    }
    let cut = crosscut.to_vec();
    Ok((
        GridDomain { grid: g, free: f1, arc1: dom.arc1.clone(), arc2: cut.clone() },
        GridDomain { grid: g, free: f2, arc1: cut, arc2: dom.arc2.clone() },
    ))
}

/// `(L(O), L(O'), L(O''))` for the split along `crosscut`.
pub fn composition_values(dom: &GridDomain, crosscut: &[usize]) -> Result<(Distance, Distance, Distance)> {
    let (d1, d2) = split_along(dom, crosscut)?;
    let (l, _, _) = solve_level(dom, SolverOptions::default())?;
    let l1 = solve_level(&d1, SolverOptions::default()).map(|r| r.0).unwrap_or(Distance::Infinite);
    let l2 = solve_level(&d2, SolverOptions::default()).map(|r| r.0).unwrap_or(Distance::Infinite);
    Ok((l, l1, l2))
}

/// Whether `L(O) >= L(O') + L(O'') - tol`.
pub fn check_composition_law(dom: &GridDomain, crosscut: &[usize], tol: f64) -> Result<bool> {
    let (l, l1, l2) = composition_values(dom, crosscut)?;
    Ok(match (l, l1, l2) {
        (Distance::Infinite, _, _) => true,
        (Distance::Finite(a), Distance::Finite(b), Distance::Finite(c)) => a >= b + c - tol,
        _ => false,
    })
}
