//! Resistor networks on grids: free cells are nodes joined to their
//! 4-neighbours by unit conductances; fixed cells hold a prescribed potential
//! and connect to free neighbours through a given conductance; walls carry no
//! current.

use crate::error::{Error, Result};
use crate::raster::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Wall,
    Free,
    Fixed { value: f64, conductance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual at which conjugate gradients stop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 200_000 }
    }
}

/// Potential on every cell (`NaN` on walls and on free components that
/// touch no fixed cell).
#[derive(Debug, Clone)]
pub struct Solution {
    pub potential: Vec<f64>,
    pub iterations: usize,
}

/// Labels of 4-connected components of free cells (`u32::MAX` elsewhere).
pub fn free_components(grid: &Grid, nodes: &[Node]) -> (Vec<u32>, usize) {
    let mut comp = vec![u32::MAX; grid.len()];
    let mut count = 0u32;
    let mut stack = Vec::new();
    let mut nb = [0usize; 4];
    for s in 0..grid.len() {
        if nodes[s] != Node::Free || comp[s] != u32::MAX {
            continue;
        }
        comp[s] = count;
        stack.push(s);
        while let Some(i) = stack.pop() {
            let n = grid.neighbors4(i, &mut nb);
            for &j in &nb[..n] {
                if nodes[j] == Node::Free && comp[j] == u32::MAX {
                    comp[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    (comp, count as usize)
}

/// Solve the discrete Laplace equation with the given boundary data by
/// Jacobi-preconditioned conjugate gradients. `guess` may seed free cells.
pub fn solve(grid: &Grid, nodes: &[Node], guess: Option<&dyn Fn(usize) -> f64>, opts: SolverOptions) -> Result<Solution> {
    assert_eq!(nodes.len(), grid.len());
    let (comp, ncomp) = free_components(grid, nodes);
    let mut lo = vec![f64::INFINITY; ncomp];
    let mut hi = vec![f64::NEG_INFINITY; ncomp];
    let mut nb = [0usize; 4];
    for i in 0..grid.len() {
        if comp[i] == u32::MAX {
            continue;
        }
        let n = grid.neighbors4(i, &mut nb);
        for &j in &nb[..n] {
            if let Node::Fixed { value, .. } = nodes[j] {
                let c = comp[i] as usize;
                lo[c] = lo[c].min(value);
                hi[c] = hi[c].max(value);
            }
        }
    }
    let mut potential = vec![f64::NAN; grid.len()];
    let mut unknown = vec![u32::MAX; grid.len()];
    let mut cells: Vec<usize> = Vec::new();
    for i in 0..grid.len() {
        if comp[i] == u32::MAX {
            continue;
        }
        let c = comp[i] as usize;
        if lo[c] == hi[c] {
            potential[i] = lo[c];
        } else if lo[c] < hi[c] {
            unknown[i] = cells.len() as u32;
            cells.push(i);
        }
    }
    let n = cells.len();
    if n == 0 {
        return Ok(Solution { potential, iterations: 0 });
    }
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut links: Vec<[u32; 4]> = vec![[u32::MAX; 4]; n];
    for (k, &i) in cells.iter().enumerate() {
        let m = grid.neighbors4(i, &mut nb);
        let mut l = 0;
        for &j in &nb[..m] {
            match nodes[j] {
                Node::Free => {
                    diag[k] += 1.0;
                    links[k][l] = unknown[j];
                    l += 1;
                }
                Node::Fixed { value, conductance } => {
                    diag[k] += conductance;
                    rhs[k] += conductance * value;
                }
                Node::Wall => {}
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..n {
            let mut s = diag[k] * x[k];
            for &j in &links[k] {
                if j == u32::MAX {
                    break;
                }
                s -= x[j as usize];
            }
            out[k] = s;
        }
    };
    let mut x: Vec<f64> = match guess {
        Some(g) => cells.iter().map(|&i| g(i)).collect(),
        None => cells.iter().map(|&i| 0.5 * (lo[comp[i] as usize] + hi[comp[i] as usize])).collect(),
    };
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|k| rhs[k] - ax[k]).collect();
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let mut z: Vec<f64> = (0..n).map(|k| r[k] / diag[k]).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut it = 0;
    loop {
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= opts.tol * bnorm {
            break;
        }
        if it >= opts.max_iter {
            return Err(Error::SolverDivergence { iterations: it, residual: rnorm / bnorm });
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        it += 1;
    }
    for (k, &i) in cells.iter().enumerate() {
        potential[i] = x[k];
    }
    Ok(Solution { potential, iterations: it })
}

/// Dirichlet energy of a potential: sum over conducting links of
/// `conductance * (difference)^2`.
pub fn energy(grid: &Grid, nodes: &[Node], pot: &[f64]) -> f64 {
    let mut e = 0.0;
    let mut nb = [0usize; 4];
    for i in 0..grid.len() {
        if nodes[i] != Node::Free || pot[i].is_nan() {
            continue;
        }
        let n = grid.neighbors4(i, &mut nb);
        for &j in &nb[..n] {
            match nodes[j] {
                Node::Free if j > i => e += (pot[i] - pot[j]).powi(2),
                Node::Fixed { value, conductance } => e += conductance * (pot[i] - value).powi(2),
                _ => {}
            }
        }
    }
    e
}

/// Current flowing from free cells into the fixed cells selected by `into`.
pub fn flux(grid: &Grid, nodes: &[Node], pot: &[f64], into: impl Fn(usize) -> bool) -> f64 {
    let mut f = 0.0;
    let mut nb = [0usize; 4];
    for i in 0..grid.len() {
        if nodes[i] != Node::Free || pot[i].is_nan() {
            continue;
        }
        let n = grid.neighbors4(i, &mut nb);
        for &j in &nb[..n] {
            if let Node::Fixed { value, conductance } = nodes[j] {
                if into(j) {
                    f += conductance * (pot[i] - value);
                }
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_resistors() {
        // 1 x 5 strip between fixed ends: resistance 1/2 + 4 + 1/2 = 5
        let g = Grid::new([0.0, 0.0], 1.0, 7, 1);
        let mut nodes = vec![Node::Free; 7];
        nodes[0] = Node::Fixed { value: 0.0, conductance: 2.0 };
        nodes[6] = Node::Fixed { value: 1.0, conductance: 2.0 };
        let sol = solve(&g, &nodes, None, SolverOptions::default()).unwrap();
        let e = energy(&g, &nodes, &sol.potential);
        assert!((e - 0.2).abs() < 1e-12);
        let f = flux(&g, &nodes, &sol.potential, |j| j == 0);
        assert!((f - 0.2).abs() < 1e-12);
    }

    #[test]
    fn floating_and_constant_components() {
        let g = Grid::new([0.0, 0.0], 1.0, 5, 1);
        let nodes = vec![
            Node::Fixed { value: 1.0, conductance: 2.0 },
            Node::Free,
            Node::Wall,
            Node::Free,
            Node::Free,
        ];
        let sol = solve(&g, &nodes, None, SolverOptions::default()).unwrap();
        assert_eq!(sol.potential[1], 1.0);
        assert!(sol.potential[3].is_nan());
        assert_eq!(energy(&g, &nodes, &sol.potential), 0.0);
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let g = Grid::new([0.0, 0.0], 1.0, 40, 40);
        let mut nodes = vec![Node::Free; g.len()];
        for y in 0..40 {
            nodes[g.index(0, y)] = Node::Fixed { value: 0.0, conductance: 2.0 };
            nodes[g.index(39, y)] = Node::Fixed { value: 1.0, conductance: 2.0 };
        }
        nodes[g.index(20, 7)] = Node::Fixed { value: 0.3, conductance: 1.0 };
        let opts = SolverOptions { tol: 1e-14, max_iter: 3 };
        assert!(matches!(solve(&g, &nodes, None, opts), Err(Error::SolverDivergence { .. })));
    }
}
