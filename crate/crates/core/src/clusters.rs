//! Loop clusters: loops are linked when their rasters share a cell, and
//! clusters are the classes of the transitive closure.

use crate::geom::{exact_diameter, from_log_polar, Rect, P2};
use crate::raster::{supercover_polyline, Grid, OccupancyRaster};
use crate::sampler::LoopSample;
use serde::{Deserialize, Serialize};

const NONE: u32 = u32::MAX;

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    pub parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Loop indices, ascending.
    pub members: Vec<usize>,
    /// Bounding box of member vertices in raster coordinates.
    pub bbox: Rect,
    /// Diameter in the plane (for log-polar sets, of the image under `exp`).
    pub diameter: f64,
    /// Occupied cell indices, ascending.
    pub cells: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClusterOptions {
    /// Exact diameter (convex hull) instead of the bounding-box diagonal.
    pub exact_diameter: bool,
    /// Coordinates are `(theta, u)`; diameters are measured after `exp`.
    pub log_polar: bool,
}

#[derive(Debug, Clone)]
pub struct ClusterSet {
    pub loop_count: usize,
    /// Flattened union-find forest: `parent[i]` is the representative of loop `i`.
    pub parent: Vec<usize>,
    /// Cluster index of each loop.
    pub loop_cluster: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub grid: Grid,
    /// Owning cluster of each cell, or `u32::MAX` when free.
    label: Vec<u32>,
}

impl ClusterSet {
    pub fn empty(grid: Grid) -> Self {
        ClusterSet {
            loop_count: 0,
            parent: Vec::new(),
            loop_cluster: Vec::new(),
            clusters: Vec::new(),
            grid,
            label: vec![NONE; grid.len()],
        }
    }

    /// Cluster occupying cell `i`, if any. Distinct clusters never share a cell.
    pub fn cluster_at(&self, i: usize) -> Option<usize> {
        match self.label[i] {
            NONE => None,
            c => Some(c as usize),
        }
    }

    pub fn raster_of(&self, id: usize) -> OccupancyRaster {
        let mut r = OccupancyRaster::new(self.grid);
        for &c in &self.clusters[id].cells {
            r.set(c as usize);
        }
        r
    }

    /// Union of all cluster rasters.
    pub fn occupancy(&self) -> OccupancyRaster {
        let mut r = OccupancyRaster::new(self.grid);
        for cl in &self.clusters {
            for &c in &cl.cells {
                r.set(c as usize);
            }
        }
        r
    }

    /// Partition as sorted member lists, sorted by first member.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut p: Vec<Vec<usize>> = self.clusters.iter().map(|c| c.members.clone()).collect();
        p.sort();
        p
    }

    pub fn summary(&self) -> Vec<ClusterSummary> {
        self.clusters
            .iter()
            .enumerate()
            .map(|(id, c)| ClusterSummary {
                id,
                size: c.members.len(),
                cells: c.cells.len(),
                diameter: c.diameter,
                x0: c.bbox.x0,
                y0: c.bbox.y0,
                x1: c.bbox.x1,
                y1: c.bbox.y1,
            })
            .collect()
    }
}

/// One CSV row of a cluster summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub size: usize,
    pub cells: usize,
    pub diameter: f64,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Planar grid covering all loops with one cell of margin.
pub fn grid_for(loops: &[LoopSample], cell: f64) -> Grid {
    let bb = loops
        .iter()
        .map(|l| l.bbox())
        .reduce(|a, b| a.union(&b))
        .unwrap_or(Rect::new(0.0, 0.0, cell, cell));
    Grid::covering(&bb.expand(cell), cell)
}

/// Clusters of planar loops at resolution `cell`.
pub fn build_clusters(loops: &[LoopSample], cell: f64) -> ClusterSet {
    build_clusters_on(loops, grid_for(loops, cell), ClusterOptions::default())
}

/// Clusters on a given grid. Each loop is rasterized once; the first loop to
/// claim a cell owns it and later loops touching the cell are united with the
/// owner, so the label grid doubles as the spatial hash.
pub fn build_clusters_on(loops: &[LoopSample], grid: Grid, opts: ClusterOptions) -> ClusterSet {
    let n = loops.len();
    let mut uf = UnionFind::new(n);
    let mut owner = vec![NONE; grid.len()];
    for (i, l) in loops.iter().enumerate() {
        supercover_polyline(&grid, &l.trace, |c| match owner[c] {
            NONE => owner[c] = i as u32,
            j if j as usize != i => {
                uf.union(i, j as usize);
            }
            _ => {}
        });
    }
    let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    let mut root_id = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = roots[i];
        if root_id[r] == usize::MAX {
            root_id[r] = members.len();
            members.push(Vec::new());
        }
        members[root_id[r]].push(i);
    }
    let loop_cluster: Vec<usize> = (0..n).map(|i| root_id[roots[i]]).collect();
    let mut cells: Vec<Vec<u32>> = vec![Vec::new(); members.len()];
    let mut label = owner;
    for (c, lab) in label.iter_mut().enumerate() {
        if *lab != NONE {
            let id = loop_cluster[*lab as usize];
            cells[id].push(c as u32);
            *lab = id as u32;
        }
    }
    let clusters = members
        .into_iter()
        .zip(cells)
        .map(|(m, cells)| {
            let pts: Vec<P2> = m.iter().flat_map(|&i| loops[i].trace.iter().copied()).collect();
            let bbox = Rect::bounding(&pts).unwrap();
            let diameter = if opts.log_polar {
                let phys: Vec<P2> = pts.iter().map(|&p| from_log_polar(p)).collect();
                if opts.exact_diameter {
                    exact_diameter(&phys)
                } else {
                    Rect::bounding(&phys).unwrap().diagonal()
                }
            } else if opts.exact_diameter {
                exact_diameter(&pts)
            } else {
                bbox.diagonal()
            };
            Cluster { members: m, bbox, diameter, cells }
        })
        .collect();
    ClusterSet { loop_count: n, parent: roots, loop_cluster, clusters, grid, label }
}

/// Ids of clusters that share a cell with `seed`.
pub fn touching_clusters(seed: &OccupancyRaster, cs: &ClusterSet) -> Vec<usize> {
    assert_eq!(seed.grid, cs.grid, "seed and clusters must share a grid");
    let mut hit = vec![false; cs.clusters.len()];
    for i in seed.bits.iter_ones() {
        if let Some(c) = cs.cluster_at(i) {
            hit[c] = true;
        }
    }
    (0..hit.len()).filter(|&c| hit[c]).collect()
}

/// Seed raster together with every cluster it touches.
pub fn attach_clusters(seed: &OccupancyRaster, cs: &ClusterSet) -> OccupancyRaster {
    let mut out = seed.clone();
    for id in touching_clusters(seed, cs) {
        for &c in &cs.clusters[id].cells {
            out.set(c as usize);
        }
    }
    out
}

/// Reference partition: pairwise raster intersection followed by a
/// Floyd-Warshall style transitive closure. Quadratic; for testing.
pub fn closure_partition(loops: &[LoopSample], grid: Grid) -> Vec<Vec<usize>> {
    let n = loops.len();
    let ras: Vec<OccupancyRaster> = loops
        .iter()
        .map(|l| crate::raster::rasterize_on(grid, &[&l.trace]))
        .collect();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        adj[i][i] = true;
        for j in 0..i {
            let t = ras[i].bits.intersects(&ras[j].bits);
            adj[i][j] = t;
            adj[j][i] = t;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if adj[i][k] {
                for j in 0..n {
                    if adj[k][j] {
                        adj[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if !seen[i] {
            let cls: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
            for &j in &cls {
                seen[j] = true;
            }
            out.push(cls);
        }
    }
    out.sort();
    out
}

fn segments_cross(a: P2, b: P2, c: P2, d: P2) -> bool {
    let orient = |p: P2, q: P2, r: P2| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let on_seg = |p: P2, q: P2, r: P2| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_seg(a, b, c))
        || (o2 == 0.0 && on_seg(a, b, d))
        || (o3 == 0.0 && on_seg(c, d, a))
        || (o4 == 0.0 && on_seg(c, d, b))
}

/// Exact contact of two planar traces (some pair of segments intersects).
pub fn traces_touch(a: &[P2], b: &[P2]) -> bool {
    let (ba, bb) = match (Rect::bounding(a), Rect::bounding(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return false,
    };
    if ba.x1 < bb.x0 || bb.x1 < ba.x0 || ba.y1 < bb.y0 || bb.y1 < ba.y0 {
        return false;
    }
    for s in a.windows(2) {
        let sb = Rect::bounding(s).unwrap();
        if sb.x1 < bb.x0 || bb.x1 < sb.x0 || sb.y1 < bb.y0 || bb.y1 < sb.y0 {
            continue;
        }
        for t in b.windows(2) {
            if segments_cross(s[0], s[1], t[0], t[1]) {
                return true;
            }
        }
    }
    false
}

/// Partition under exact segment intersection (cross-validation of the raster
/// predicate; quadratic in the number of segments).
pub fn exact_partition(loops: &[LoopSample]) -> Vec<Vec<usize>> {
    let n = loops.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..i {
            if uf.find(i) != uf.find(j) && traces_touch(&loops[i].trace, &loops[j].trace) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = uf.find(i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}
