//! Extremal distances and avoidance probabilities for pairs of excursions
//! across an annulus, on the cylinder `(theta, u)`.

use super::solver::{energy, flux, free_components, solve, Node, SolverOptions};
use super::Distance;
use crate::clusters::{attach_clusters, build_clusters_on, ClusterOptions, ClusterSet};
use crate::error::Result;
use crate::geom::{P2, TAU};
use crate::raster::{Grid, OccupancyRaster};
use crate::sampler::{ExcursionSample, LoopSample};
use serde::{Deserialize, Serialize};

/// Cylinder grid of `width` columns whose interior rows cover `[s, r]`, with
/// one ghost row below `C_s` and one above `C_r`.
pub fn annulus_grid(width: usize, s: f64, r: f64) -> Grid {
    let h = TAU / width as f64;
    let n = ((r - s) / h - 1e-9).ceil().max(1.0) as usize;
    Grid { origin: [0.0, s - h], cell: h, width, height: n + 2, wrap_x: true }
}

/// Each excursion's raster together with the soup clusters it touches.
pub fn excursion_obstacles(grid: Grid, y1: &[P2], y2: &[P2], clusters: Option<&ClusterSet>) -> (OccupancyRaster, OccupancyRaster) {
    let one = |t: &[P2]| {
        let mut r = OccupancyRaster::new(grid);
        r.add_polyline(t);
        match clusters {
            Some(cs) => attach_clusters(&r, cs),
            None => r,
        }
    };
    (one(y1), one(y2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairExtremal {
    pub l1: Distance,
    pub l2: Distance,
    pub lmin: Distance,
}

fn boundary_nodes(grid: &Grid, obstacle: impl Fn(usize) -> Node) -> Vec<Node> {
    let top = grid.height - 1;
    (0..grid.len())
        .map(|i| {
            let y = i / grid.width;
            if y == 0 {
                Node::Fixed { value: 0.0, conductance: 2.0 }
            } else if y == top {
                Node::Fixed { value: 1.0, conductance: 2.0 }
            } else {
                obstacle(i)
            }
        })
        .collect()
}

/// Extremal distances between `C_s` and `C_r` in the two sides of the
/// complement of the obstacles: side 1 holds the free components meeting
/// `C_s` on the counterclockwise arc from `theta1` to `theta2`, side 2 the
/// rest. Several components on one side conduct in parallel; a side with no
/// component reaching `C_r` is infinitely far.
pub fn pair_extremal_on(obstacles: &OccupancyRaster, theta1: f64, theta2: f64) -> Result<PairExtremal> {
    let grid = obstacles.grid;
    let nodes = boundary_nodes(&grid, |i| if obstacles.get(i) { Node::Wall } else { Node::Free });
    let (comp, ncomp) = free_components(&grid, &nodes);
    let mut side = vec![0u8; ncomp];
    let span = (theta2 - theta1).rem_euclid(TAU);
    let mut later = Vec::new();
    for x in 0..grid.width {
        let i = grid.index(x, 1);
        if comp[i] == u32::MAX {
            continue;
        }
        let a = (grid.center(i)[0] - theta1).rem_euclid(TAU);
        if a < span {
            if side[comp[i] as usize] == 0 {
                side[comp[i] as usize] = 1;
            }
        } else {
            later.push(i);
        }
    }
    for i in later {
        if side[comp[i] as usize] == 0 {
            side[comp[i] as usize] = 2;
        }
    }
    let mut out = [Distance::Infinite; 2];
    for k in 1..=2u8 {
        let sub: Vec<Node> = nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| match n {
                Node::Free if side[comp[i] as usize] != k => Node::Wall,
                n => n,
            })
            .collect();
        let sol = solve(&grid, &sub, None, SolverOptions::default())?;
        out[k as usize - 1] = Distance::from_energy(energy(&grid, &sub, &sol.potential));
    }
    Ok(PairExtremal { l1: out[0], l2: out[1], lmin: out[0].min(out[1]) })
}

/// Extremal distances for two excursions across `A(s, r)` (taken from `y1`)
/// and a cylinder soup, on a grid of `width` angular cells. Soup loops are
/// restricted to the annulus before clustering.
pub fn excursion_pair_extremal(y1: &ExcursionSample, y2: &ExcursionSample, soup: &[LoopSample], width: usize) -> Result<PairExtremal> {
    let grid = annulus_grid(width, y1.s, y1.r);
    let inside: Vec<LoopSample> =
        soup.iter().filter(|l| l.trace.iter().all(|p| p[1] >= y1.s && p[1] <= y1.r)).cloned().collect();
    let cs = build_clusters_on(&inside, grid, ClusterOptions { exact_diameter: false, log_polar: true });
    let (a, b) = excursion_obstacles(grid, &y1.trace, &y2.trace, Some(&cs));
    let mut ob = a;
    ob.or_assign(&b);
    pair_extremal_on(&ob, y1.trace[0][0], y2.trace[0][0])
}

/// Probability that an excursion from `C_s` to `C_r` avoids the obstacles:
/// the current into `C_s` of the potential that is 1 on `C_r` and 0 on `C_s`
/// and on the obstacles, divided by the same current with no obstacles.
pub fn avoidance_probability(obstacles: &OccupancyRaster) -> Result<f64> {
    let grid = obstacles.grid;
    let nodes = boundary_nodes(&grid, |i| {
        if obstacles.get(i) {
            Node::Fixed { value: 0.0, conductance: 1.0 }
        } else {
            Node::Free
        }
    });
    let sol = solve(&grid, &nodes, None, SolverOptions::default())?;
    let f = flux(&grid, &nodes, &sol.potential, |j| j < grid.width);
    let rows = (grid.height - 2) as f64;
    let empty = grid.width as f64 / rows;
    Ok((f / empty).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn radial(theta: f64, s: f64, r: f64) -> Vec<P2> {
        (0..=100).map(|k| [theta, s + (r - s) * k as f64 / 100.0]).collect()
    }

    #[test]
    fn opposite_radial_segments_split_into_half_annuli() {
        let grid = annulus_grid(256, 0.0, 2.0);
        let (a, b) = excursion_obstacles(grid, &radial(0.01, 0.0, 2.0), &radial(PI + 0.01, 0.0, 2.0), None);
        let mut ob = a;
        ob.or_assign(&b);
        let pe = pair_extremal_on(&ob, 0.01, PI + 0.01).unwrap();
        // half annulus: pi (r - s) / pi = 2
        for l in [pe.l1, pe.l2] {
            let v = l.finite().unwrap();
            assert!((v - 2.0).abs() < 0.06, "{v}");
        }
    }

    #[test]
    fn sealed_side_is_infinite() {
        let grid = annulus_grid(128, 0.0, 2.0);
        let (a, b) = excursion_obstacles(grid, &radial(0.5, 0.0, 2.0), &radial(3.5, 0.0, 2.0), None);
        let mut ob = a;
        ob.or_assign(&b);
        // wall across side 1 only
        ob.add_polyline(&[[0.5, 1.0], [3.5, 1.0]]);
        let pe = pair_extremal_on(&ob, 0.5, 3.5).unwrap();
        assert!(pe.l1.is_infinite());
        assert!(pe.l2.finite().is_some());
        assert_eq!(pe.lmin, pe.l2);
    }

    #[test]
    fn empty_annulus_is_always_avoided() {
        let grid = annulus_grid(64, 0.0, 1.0);
        let p = avoidance_probability(&OccupancyRaster::new(grid)).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
    }
}
