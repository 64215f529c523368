use loopsoup::extremal::{
    annulus_grid, avoidance_probability, cartesian_annulus, cartesian_domain, cartesian_wedge, check_comparison_principle,
    check_composition_law, composition_values, cylinder_band, extremal_distance, extremal_distance_levels,
    extremal_distance_single, CellClass, GridDomain,
};
use loopsoup::geom::{P2, TAU};
use loopsoup::raster::{Grid, OccupancyRaster};
use loopsoup::rng::stream;
use loopsoup::sampler::sample_excursion;
use rand::Rng;

fn value(d: &GridDomain) -> f64 {
    extremal_distance_single(d).unwrap().value.finite().unwrap()
}

/// Rectangle grid `w x h` with random wall discs; arcs are rows `a0..a1` of
/// the left ghost column and `b0..b1` of the right one.
fn random_domain<R: Rng>(rng: &mut R, w: usize, h: usize, blobs: &[(f64, f64, f64)], a: (usize, usize), b: (usize, usize)) -> GridDomain {
    let grid = Grid::new([-1.0, 0.0], 1.0, w + 2, h);
    let _ = rng;
    cartesian_domain(grid, |p| {
        let row = p[1].floor() as usize;
        if p[0] < 0.0 {
            if row >= a.0 && row < a.1 {
                CellClass::Arc1
            } else {
                CellClass::Wall
            }
        } else if p[0] > w as f64 {
            if row >= b.0 && row < b.1 {
                CellClass::Arc2
            } else {
                CellClass::Wall
            }
        } else if blobs.iter().any(|&(x, y, r)| (p[0] - x).hypot(p[1] - y) < r) {
            CellClass::Wall
        } else {
            CellClass::Free
        }
    })
}

fn blobs<R: Rng>(rng: &mut R, n: usize, w: f64, h: f64) -> Vec<(f64, f64, f64)> {
    (0..n).map(|_| (2.0 + rng.random::<f64>() * (w - 4.0), rng.random::<f64>() * h, 1.0 + 3.0 * rng.random::<f64>())).collect()
}

#[test]
fn comparison_principle_on_random_enlargements() {
    let mut rng = stream(41, &[], 0);
    let (w, h) = (40, 24);
    let mut checked = 0;
    while checked < 100 {
        let all = blobs(&mut rng, 6, w as f64, h as f64);
        let keep = rng.random_range(0..=all.len());
        let a0 = rng.random_range(0..h / 2);
        let a1 = rng.random_range(a0 + 1..=h);
        let b0 = rng.random_range(0..h / 2);
        let b1 = rng.random_range(b0 + 1..=h);
        let small = random_domain(&mut rng, w, h, &all, (a0, a1), (b0, b1));
        let big = random_domain(&mut rng, w, h, &all[..keep], (a0.saturating_sub(2), h), (0, b1));
        if small.validate().is_err() || big.validate().is_err() {
            continue;
        }
        assert!(check_comparison_principle(&small, &big, 1e-9).unwrap());
        assert!(check_comparison_principle(&small, &small, 1e-9).unwrap());
        checked += 1;
    }
}

#[test]
fn widening_a_rectangle_strictly_decreases_distance() {
    let grid = Grid::new([-1.0, 0.0], 1.0, 42, 40);
    let make = |rows: f64| {
        cartesian_domain(grid, move |p| {
            if p[1] > rows {
                CellClass::Wall
            } else if p[0] < 0.0 {
                CellClass::Arc1
            } else if p[0] > 40.0 {
                CellClass::Arc2
            } else {
                CellClass::Free
            }
        })
    };
    let (narrow, wide) = (make(20.0), make(30.0));
    assert!(check_comparison_principle(&narrow, &wide, 1e-9).unwrap());
    assert!(value(&wide) < value(&narrow) - 0.1);
}

#[test]
fn composition_law_on_annular_domains_with_circular_crosscuts() {
    let mut rng = stream(42, &[], 0);
    for _ in 0..100 {
        let holes: Vec<(f64, f64, f64)> = (0..5)
            .map(|_| (TAU * rng.random::<f64>(), 2.0 * rng.random::<f64>(), 0.1 + 0.4 * rng.random::<f64>()))
            .collect();
        let dom = cylinder_band(64, 0.0, 2.0, |p: P2| {
            !holes.iter().any(|&(t, u, r)| {
                let dt = (p[0] - t).rem_euclid(TAU).min((t - p[0]).rem_euclid(TAU));
                dt.hypot(p[1] - u) < r
            })
        });
        if dom.validate().is_err() {
            continue;
        }
        let m = 0.3 + 1.4 * rng.random::<f64>();
        let y = dom.grid.row_of(m);
        let cut: Vec<usize> = (0..64).map(|x| dom.grid.index(x, y)).filter(|&i| dom.free.get(i)).collect();
        assert!(check_composition_law(&dom, &cut, 1e-9).unwrap());
    }
}

#[test]
fn wavy_crosscut_keeps_the_inequality() {
    let grid = Grid::new([-1.0, 0.0], 1.0, 62, 40);
    let dom = cartesian_domain(grid, |p| {
        if p[0] < 0.0 {
            CellClass::Arc1
        } else if p[0] > 60.0 {
            CellClass::Arc2
        } else {
            CellClass::Free
        }
    });
    let cut: Vec<usize> =
        (0..40).map(|y| grid.index((31.0 + 4.0 * (y as f64 / 4.0).sin()).round() as usize, y)).collect();
    let (l, a, b) = composition_values(&dom, &cut).unwrap();
    let (l, a, b) = (l.finite().unwrap(), a.finite().unwrap(), b.finite().unwrap());
    assert!(l > a + b, "{l} vs {a} + {b}");
    assert!(check_composition_law(&dom, &cut, 1e-9).unwrap());
}

#[test]
fn swapping_arcs_on_random_domains() {
    let mut rng = stream(43, &[], 0);
    for _ in 0..10 {
        let b = blobs(&mut rng, 5, 30.0, 20.0);
        let d = random_domain(&mut rng, 30, 20, &b, (0, 20), (3, 15));
        if d.validate().is_err() {
            continue;
        }
        let r1 = extremal_distance_single(&d).unwrap().dirichlet_energy;
        let r2 = extremal_distance_single(&d.swapped()).unwrap().dirichlet_energy;
        assert!((r1 - r2).abs() <= 1e-10 * r1.max(1.0), "{r1} {r2}");
    }
}

#[test]
fn scaling_the_domain_and_grid_together_changes_nothing() {
    let shape = |scale: f64| {
        move |p: P2| {
            let q = [p[0] / scale, p[1] / scale];
            let lr = q[0].hypot(q[1]).ln() + 0.15 * (3.0 * q[1].atan2(q[0])).sin();
            if lr <= 0.0 {
                CellClass::Arc1
            } else if lr >= 1.2 {
                CellClass::Arc2
            } else {
                CellClass::Free
            }
        }
    };
    let h = 0.05;
    let g1 = Grid::new([-4.0, -4.0], h, 160, 160);
    let g2 = Grid::new([-8.0, -8.0], 2.0 * h, 160, 160);
    let a = value(&cartesian_domain(g1, shape(1.0)));
    let b = value(&cartesian_domain(g2, shape(2.0)));
    assert!((a - b).abs() < 1e-8, "{a} {b}");
}

#[test]
fn richardson_estimate_is_honest() {
    for (name, build) in [
        ("wedge", Box::new(|h: f64| cartesian_wedge(0.5, 0.0, 1.0, h)) as Box<dyn Fn(f64) -> GridDomain>),
        ("annulus", Box::new(|h: f64| cartesian_annulus(0.0, 1.0, h))),
    ] {
        let h = 0.04;
        let coarse = extremal_distance_levels(|k| build(h * (1 << k) as f64)).unwrap();
        let fine = extremal_distance_levels(|k| build(h / 2.0 * (1 << k) as f64)).unwrap();
        let jump = (coarse.value.finite().unwrap() - fine.value.finite().unwrap()).abs();
        assert!(jump <= 4.0 * coarse.richardson_error_estimate, "{name}: {jump} vs {}", coarse.richardson_error_estimate);
    }
    let d = cartesian_annulus(0.0, 1.0, 0.05);
    let r = extremal_distance(&d).unwrap();
    assert_eq!(r.grid_levels_used, 2);
    assert!(r.richardson_error_estimate.is_finite());
}

/// Corridor of angular width `a` in `|u - m| <= 0.5` and `2a` elsewhere;
/// returns `L(D) - L(D') - L(D'')` for the split along `C_m`.
fn reverse_composition_constant(r: f64, a: f64) -> f64 {
    let m = r / 2.0;
    let dom = cylinder_band(256, 0.0, r, |p: P2| {
        let half = if (p[1] - m).abs() <= 0.5 { a / 2.0 } else { a };
        (p[0] - 1.0).abs() < half
    });
    let y = dom.grid.row_of(m);
    let cut: Vec<usize> = (0..256).map(|x| dom.grid.index(x, y)).filter(|&i| dom.free.get(i)).collect();
    let (l, l1, l2) = composition_values(&dom, &cut).unwrap();
    l.finite().unwrap() - l1.finite().unwrap() - l2.finite().unwrap()
}

#[test]
fn reverse_composition_constant_is_scale_stable() {
    for a in [0.6, 1.0] {
        let c2 = reverse_composition_constant(2.0, a);
        let c4 = reverse_composition_constant(4.0, a);
        eprintln!("reverse composition constant, corridor width {a}: C(r=2) = {c2:.4}, C(r=4) = {c4:.4}");
        assert!(c2 > 0.0 && c4 > 0.0);
        assert!((c4 / c2 - 1.0).abs() <= 0.5, "{c2} {c4}");
    }
}

#[test]
fn avoidance_flux_matches_simulated_excursions() {
    let grid = annulus_grid(128, 0.0, 1.5);
    let mut ob = OccupancyRaster::new(grid);
    // a radial barrier and a partial ring
    ob.add_polyline(&[[1.0, 0.0], [1.0, 1.0]]);
    ob.add_polyline(&[[2.0, 0.8], [5.5, 0.8]]);
    let p = avoidance_probability(&ob).unwrap();
    let mut rng = stream(44, &[], 0);
    let n = 4000;
    let mut ok = 0;
    for _ in 0..n {
        let e = sample_excursion(0.0, 1.5, 0.01, &mut rng);
        let mut tr = OccupancyRaster::new(grid);
        tr.add_polyline(&e.trace);
        ok += !tr.bits.intersects(&ob.bits) as usize;
    }
    let q = ok as f64 / n as f64;
    let se = (q * (1.0 - q) / n as f64).sqrt();
    assert!((p - q).abs() < 3.0 * se + 0.02, "flux {p} vs simulated {q} (se {se})");
}
