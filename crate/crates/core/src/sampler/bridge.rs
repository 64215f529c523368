//! Brownian bridges.

use crate::geom::P2;
use rand::Rng;
use rand_distr::StandardNormal;

/// Bridge from `a` to `b` over duration `t` by forward recursion: with `n`
/// steps of size `h = t/n`, the increment from time `s` is Gaussian with mean
/// `(b - x) h/(t - s)` and variance `h (t - s - h)/(t - s)` per coordinate.
/// Returns `n + 1` vertices; the last is exactly `b`.
pub fn bridge_forward<R: Rng + ?Sized>(rng: &mut R, a: P2, b: P2, t: f64, n: usize) -> Vec<P2> {
    let n = n.max(1);
    let h = t / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut x = a;
    out.push(x);
    for i in 0..n - 1 {
        let rem = t - i as f64 * h;
        let mean_f = h / rem;
        let sd = (h * (rem - h) / rem).sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        x = [
            x[0] + (b[0] - x[0]) * mean_f + sd * z0,
            x[1] + (b[1] - x[1]) * mean_f + sd * z1,
        ];
        out.push(x);
    }
    out.push(b);
    out
}

/// Bridge by midpoint refinement: `levels` rounds of halving give
/// `2^levels + 1` vertices.
pub fn bridge_midpoint<R: Rng + ?Sized>(rng: &mut R, a: P2, b: P2, t: f64, levels: u32) -> Vec<P2> {
    let n = 1usize << levels;
    let mut pts = vec![[0.0; 2]; n + 1];
    pts[0] = a;
    pts[n] = b;
    let mut span = n;
    while span > 1 {
        let half = span / 2;
        // variance of the midpoint of a bridge of duration d is d/4
        let sd = (t * span as f64 / n as f64 / 4.0).sqrt();
        let mut i = 0;
        while i < n {
            let (l, r) = (pts[i], pts[i + span]);
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            pts[i + half] = [0.5 * (l[0] + r[0]) + sd * z0, 0.5 * (l[1] + r[1]) + sd * z1];
            i += span;
        }
        span = half;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::mean_var;

    #[test]
    fn bridge_endpoints_exact() {
        let mut r = stream(1, &[], 0);
        let b = bridge_forward(&mut r, [0.3, -0.2], [0.3, -0.2], 0.7, 50);
        assert_eq!(b.len(), 51);
        assert_eq!(b[0], b[50]);
        let m = bridge_midpoint(&mut r, [0.0, 0.0], [1.0, 0.0], 1.0, 6);
        assert_eq!(m.len(), 65);
        assert_eq!(m[64], [1.0, 0.0]);
    }

    #[test]
    fn bridge_midpoint_variance() {
        // Var of a unit bridge at time 1/2 is 1/4 per coordinate, for both samplers.
        let mut r = stream(2, &[], 0);
        let mut f = Vec::new();
        let mut m = Vec::new();
        for _ in 0..20000 {
            f.push(bridge_forward(&mut r, [0.0; 2], [0.0; 2], 1.0, 8)[4][0]);
            m.push(bridge_midpoint(&mut r, [0.0; 2], [0.0; 2], 1.0, 3)[4][0]);
        }
        let (_, vf) = mean_var(&f);
        let (_, vm) = mean_var(&m);
        assert!((vf - 0.25).abs() < 0.015, "{vf}");
        assert!((vm - 0.25).abs() < 0.015, "{vm}");
    }
}
