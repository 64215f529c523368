//! Distributional checks of the samplers.

use loopsoup::geom::{exact_diameter, wrap_angle, Rect, TAU};
use loopsoup::rng::stream;
use loopsoup::sampler::{
    loop_mass_above_diameter, restrict_soup, sample_crossing, sample_excursion, sample_excursion_via_last_exit,
    sample_loop_soup, soup_mass, MassWindow, SoupConfig, Walk,
};
use loopsoup::stats::{correlation, ks_two_sample, mean_var};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(angles: &[f64], bins: usize) -> f64 {
    let mut counts = vec![0u64; bins];
    for &a in angles {
        let b = ((wrap_angle(a) / TAU) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let e = angles.len() as f64 / bins as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((bins - 1) as f64).unwrap().sf(stat)
}

#[test]
fn soup_counts_are_poisson_with_closed_form_mean() {
    let cfg = SoupConfig::plane(1.0, Rect::new(0.0, 0.0, 1.0, 1.0), 0.01, 1.0, 0);
    let expect = 99.0 / TAU;
    assert!((soup_mass(&cfg) - expect).abs() < 1e-12);
    let mut rng = stream(101, &[], 0);
    let counts: Vec<f64> = (0..10_000).map(|_| sample_loop_soup(&cfg, &mut rng).unwrap().len() as f64).collect();
    let (m, v) = mean_var(&counts);
    let se = (v / counts.len() as f64).sqrt();
    assert!((m - expect).abs() < 3.0 * se, "mean {m} vs {expect}");
    let ratio = v / m;
    assert!((0.9..=1.1).contains(&ratio), "variance/mean {ratio}");
}

#[test]
fn brownian_scaling_of_soups() {
    // z -> 2z, t -> 4t maps a soup in [0,1]^2 to a soup in [0,2]^2
    let small = SoupConfig::plane(1.0, Rect::new(0.0, 0.0, 1.0, 1.0), 0.01, 0.25, 0);
    let big = SoupConfig::plane(1.0, Rect::new(0.0, 0.0, 2.0, 2.0), 0.04, 1.0, 0);
    let mut rng = stream(102, &[], 0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    while a.len() < 3000 {
        a.extend(sample_loop_soup(&small, &mut rng).unwrap().iter().map(|l| 2.0 * exact_diameter(&l.trace)));
    }
    while b.len() < 3000 {
        b.extend(sample_loop_soup(&big, &mut rng).unwrap().iter().map(|l| exact_diameter(&l.trace)));
    }
    let (d, p) = ks_two_sample(&a, &b);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn restriction_of_a_soup_is_a_soup() {
    let outer = SoupConfig::plane(1.0, Rect::new(0.0, 0.0, 2.0, 2.0), 0.005, 0.1, 0);
    let inner_rect = Rect::new(0.5, 0.5, 1.5, 1.5);
    let inner = SoupConfig::plane(1.0, inner_rect, 0.005, 0.1, 0);
    let mut rng = stream(103, &[], 0);
    let n = 1500;
    let a: Vec<f64> =
        (0..n).map(|_| restrict_soup(&sample_loop_soup(&outer, &mut rng).unwrap(), &inner_rect).len() as f64).collect();
    let b: Vec<f64> =
        (0..n).map(|_| restrict_soup(&sample_loop_soup(&inner, &mut rng).unwrap(), &inner_rect).len() as f64).collect();
    let (d, p) = ks_two_sample(&a, &b);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
    let (ma, _) = mean_var(&a);
    let (mb, _) = mean_var(&b);
    assert!((ma - mb).abs() < 0.1 * mb.max(1.0), "{ma} vs {mb}");
}

#[test]
fn crossing_exit_angle_is_uniform() {
    let mut rng = stream(104, &[], 0);
    let angles: Vec<f64> = (0..100_000).map(|_| sample_crossing(1, 0.5, 0.2, &mut rng).paths[0].last()[0]).collect();
    let p = chi_square_p(&angles, 32);
    assert!(p > 0.01, "chi-square p = {p}");
}

#[test]
fn two_crossings_are_independent() {
    let mut rng = stream(105, &[], 0);
    let n = 5000;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let cs = sample_crossing(2, 0.5, 0.2, &mut rng);
        x.push(wrap_angle(cs.paths[0].last()[0]));
        y.push(wrap_angle(cs.paths[1].last()[0]));
    }
    let rho = correlation(&x, &y);
    assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "correlation {rho}");
}

#[test]
fn excursion_start_angle_is_uniform() {
    let mut rng = stream(106, &[], 0);
    let angles: Vec<f64> = (0..20_000).map(|_| sample_excursion(0.0, 0.5, 0.05, &mut rng).trace[0][0]).collect();
    let p = chi_square_p(&angles, 32);
    assert!(p > 0.01, "chi-square p = {p}");
}

#[test]
fn excursion_constructions_agree_in_law() {
    // skew product (Bessel-3 radius) vs post-last-exit segment of a path from the origin
    let mut rng = stream(107, &[], 0);
    let n = 2000;
    let step = 0.02;
    let a: Vec<f64> = (0..n).map(|_| sample_excursion(0.0, 1.0, step, &mut rng).angle_change()).collect();
    let walk = Walk::new(step, -1.5);
    let b: Vec<f64> = (0..n).map(|_| sample_excursion_via_last_exit(0.0, 1.0, &walk, &mut rng).angle_change()).collect();
    let (d, p) = ks_two_sample(&a, &b);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn excursions_stay_in_the_annulus() {
    let mut rng = stream(108, &[], 0);
    let tol = 0.02;
    for _ in 0..500 {
        let e = sample_excursion(0.3, 1.3, 0.02, &mut rng);
        assert!(e.trace.iter().all(|p| p[1] >= 0.3 - tol && p[1] <= 1.3 + tol));
    }
}

#[test]
fn large_loop_mass_is_finite_and_monotone() {
    let w = MassWindow { t_min: 0.01, t_max: 16.0, samples: 40_000, vertices: 256, seed: 9 };
    let est: Vec<_> = [0.5, 1.0, 2.0].iter().map(|&r| loop_mass_above_diameter(r, &w).unwrap()).collect();
    for e in &est {
        assert!(e.value.is_finite() && e.value > 0.0);
    }
    // same draws at every R, so the estimate is exactly monotone
    assert!(est[0].value >= est[1].value && est[1].value >= est[2].value);
    assert_eq!(loop_mass_above_diameter(1e6, &w).unwrap().value, 0.0);
    // once t_max is large, doubling it barely changes the mass of loops of diameter >= 1
    let w2 = MassWindow { t_max: 32.0, seed: 10, ..w };
    let e2 = loop_mass_above_diameter(1.0, &w2).unwrap();
    let pooled = (est[1].stderr.powi(2) + e2.stderr.powi(2)).sqrt();
    assert!((e2.value - est[1].value).abs() < 3.0 * pooled, "{} vs {} (se {pooled})", e2.value, est[1].value);
}
