use super::{fit_tallies, radius_estimate, run_trials, CampaignSpec, ExponentFit, Tally, ZMethod};
use crate::clusters::{attach_clusters, build_clusters_on, ClusterOptions, ClusterSet};
use crate::connectivity::{alpha_sep_report, disconnects_or_sealed, AnnulusScene, SepConfig, SepReport, FRAME_MARGIN};
use crate::error::{Error, Result};
use crate::estimators::fit::fit_power_law;
use crate::extremal::solver::{solve, Node, SolverOptions};
use crate::extremal::{annulus_grid, excursion_obstacles, excursion_pair_extremal, pair_extremal_on};
use crate::geom::{P2, TAU};
use crate::raster::{supercover_polyline, Grid, OccupancyRaster};
use crate::rng::{tag_f64, Stream};
use crate::sampler::{
    last_exit, run_until, sample_crossing_with, sample_excursion, sample_loop_soup, CrossingSample, ExcursionSample,
    LoopSample, SoupConfig, Walk,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

const TAG_P0: u64 = 0x7030;
const TAG_DR: u64 = 0x4472;
const TAG_Z: u64 = 0x5a72;
const TAG_B: u64 = 0x6274;
const TAG_SEP: u64 = 0x5365;

/// Paths re-enter from `C_{-1}` by the Poisson kernel.
pub const PATH_FLOOR: f64 = -1.0;
/// Depth below `C_0` of the raster used for harmonic avoidance (reflecting bottom).
pub const HARMONIC_DEPTH: f64 = 2.5;

fn walk(spec: &CampaignSpec) -> Walk {
    Walk::new(spec.step, PATH_FLOOR)
}

/// Cylinder soup with roots in `[u0, r]`, keeping the loops accepted by `keep`.
pub fn band_soup(spec: &CampaignSpec, u0: f64, r: f64, keep: impl Fn(&LoopSample) -> bool, rng: &mut Stream) -> Result<Vec<LoopSample>> {
    if spec.c == 0.0 {
        return Ok(Vec::new());
    }
    let (t_min, t_max) = spec.cutoffs(r);
    let cfg = SoupConfig::cylinder(spec.c, u0, r, t_min, t_max, spec.seed);
    Ok(sample_loop_soup(&cfg, rng)?.into_iter().filter(|l| keep(l)).collect())
}

/// Loops inside `B_r` that leave the unit disk.
pub fn outer_soup(spec: &CampaignSpec, r: f64, rng: &mut Stream) -> Result<Vec<LoopSample>> {
    band_soup(spec, -spec.soup_depth, r, |l| l.trace.iter().all(|p| p[1] <= r) && l.trace.iter().any(|p| p[1] > 0.0), rng)
}

/// Loops inside the annulus `A(0, r)`.
pub fn annulus_soup(spec: &CampaignSpec, r: f64, rng: &mut Stream) -> Result<Vec<LoopSample>> {
    band_soup(spec, 0.0, r, |l| l.trace.iter().all(|p| p[1] >= 0.0 && p[1] <= r), rng)
}

fn log_polar_clusters(loops: &[LoopSample], grid: Grid) -> ClusterSet {
    build_clusters_on(loops, grid, ClusterOptions { exact_diameter: false, log_polar: true })
}

/// Outer configuration at radius `r`: `k` crossings from `C_0` to `C_r`
/// together with the clusters of the soup in `B_r` (loops leaving the unit
/// disk) that they touch, on a raster reaching `depth` below `C_0`.
pub fn outer_configuration(spec: &CampaignSpec, r: f64, depth: f64, rng: &mut Stream) -> Result<(AnnulusScene, CrossingSample)> {
    let mut scene = AnnulusScene::new(spec.width, 0.0, r, depth);
    let cr = sample_crossing_with(rng, spec.k, r, &walk(spec));
    for p in &cr.paths {
        scene.add_trace(p);
    }
    let soup = outer_soup(spec, r, rng)?;
    if !soup.is_empty() {
        let cs = log_polar_clusters(&soup, *scene.grid());
        scene.raster = attach_clusters(&scene.raster, &cs);
    }
    Ok((scene, cr))
}

/// Whether the outer configuration leaves `C_0` connected to infinity.
pub fn p0_trial(spec: &CampaignSpec, r: f64, rng: &mut Stream) -> Result<bool> {
    let (scene, _) = outer_configuration(spec, r, 1.0, rng)?;
    Ok(!disconnects_or_sealed(&scene))
}

fn check_successes(spec: &CampaignSpec, tallies: &[Tally]) -> Result<()> {
    for (&r, t) in spec.radii.iter().zip(tallies) {
        if t.successes < spec.min_successes {
            return Err(Error::InsufficientSuccesses { r, successes: t.successes, needed: spec.min_successes });
        }
    }
    Ok(())
}

/// Per-radius tallies of the non-disconnection campaign over the trial range.
pub fn p0_tallies(spec: &CampaignSpec, trials: std::ops::Range<u64>) -> Result<Vec<Tally>> {
    spec.validate()?;
    if spec.lambda != 0.0 {
        return Err(Error::Domain(format!("estimate_p0 needs lambda = 0, got {}", spec.lambda)));
    }
    Ok(spec
        .radii
        .iter()
        .map(|&r| {
            let tags = [TAG_P0, spec.k as u64, tag_f64(spec.c), tag_f64(r)];
            run_trials(spec.seed, &tags, trials.clone(), 1, |rng| vec![p0_trial(spec, r, rng).ok().map(|ok| ok as u8 as f64)])[0]
        })
        .collect())
}

/// Non-disconnection probability per radius and its exponential decay rate.
pub fn estimate_p0(spec: &CampaignSpec) -> Result<ExponentFit> {
    let t = p0_tallies(spec, 0..spec.trials_per_radius)?;
    fit_tallies(spec, &t, |_| 1.0)
}

/// Fit of `p0` at `t_max` and at `factor * t_max`.
pub fn cutoff_sweep(spec: &CampaignSpec, factor: f64) -> Result<(ExponentFit, ExponentFit)> {
    let base = estimate_p0(spec)?;
    let wide = CampaignSpec { t_max_scale: spec.t_max_scale * factor.sqrt(), ..spec.clone() };
    Ok((base, estimate_p0(&wide)?))
}

/// One path from `C_0` to `C_r`, cut at its last visit to `C_0`: whether
/// that piece leaves `C_0` connected to infinity.
pub fn dr_trial(spec: &CampaignSpec, r: f64, rng: &mut Stream) -> bool {
    let th = TAU * rng.random::<f64>();
    let tr = run_until(rng, [th, 0.0], r, &walk(spec));
    let (i, exit) = last_exit(&tr, 0.0).expect("the path starts on C_0");
    let mut piece = tr.prefix(i);
    if piece.last() != exit {
        piece.points.push(exit);
    }
    let mut scene = AnnulusScene::new(spec.width, 0.0, r, 1.0);
    scene.add_trace(&piece);
    !disconnects_or_sealed(&scene)
}

/// `P(D_r)` per radius and its log-log slope.
pub fn estimate_dr(spec: &CampaignSpec) -> Result<ExponentFit> {
    spec.validate()?;
    let tallies: Vec<Tally> = spec
        .radii
        .iter()
        .map(|&r| run_trials(spec.seed, &[TAG_DR, tag_f64(r)], 0..spec.trials_per_radius, 1, |rng| vec![Some(dr_trial(spec, r, rng) as u8 as f64)])[0])
        .collect();
    check_successes(spec, &tallies)?;
    let pts: Vec<_> = spec.radii.iter().zip(&tallies).map(|(&r, t)| radius_estimate(r, t, 1.0)).collect();
    fit_power_law(&pts)
}

/// Probability that a path from a uniform point of `C_0` reaches `C_r`
/// without meeting the obstacles, as a discrete harmonic function: 1 on the
/// rows above `C_r`, 0 on obstacle cells, reflecting at the bottom of the
/// raster; averaged over the row of `C_0`.
pub fn harmonic_avoidance(scene: &AnnulusScene) -> Result<f64> {
    let g = *scene.grid();
    let top = g.row_of(scene.r) + 1;
    let nodes: Vec<Node> = (0..g.len())
        .map(|i| {
            if i / g.width >= top {
                Node::Fixed { value: 1.0, conductance: 1.0 }
            } else if scene.raster.get(i) {
                Node::Fixed { value: 0.0, conductance: 1.0 }
            } else {
                Node::Free
            }
        })
        .collect();
    let sol = solve(&g, &nodes, None, SolverOptions::default())?;
    let y = g.row_of(0.0);
    let mut s = 0.0;
    for x in 0..g.width {
        let i = g.index(x, y);
        if let Node::Free = nodes[i] {
            let v = sol.potential[i];
            if v.is_finite() {
                s += v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(s / g.width as f64)
}

/// Fraction of `m` independent paths from uniform points of `C_0` to `C_r`
/// whose raster avoids the obstacles.
pub fn inner_path_avoidance(scene: &AnnulusScene, m: usize, walk: &Walk, rng: &mut Stream) -> f64 {
    let g = *scene.grid();
    let mut ok = 0usize;
    for _ in 0..m {
        let th = TAU * rng.random::<f64>();
        let tr = run_until(rng, [th, 0.0], scene.r, walk);
        let mut hit = false;
        for piece in tr.pieces() {
            supercover_polyline(&g, piece, |i| hit |= scene.raster.get(i));
        }
        ok += !hit as usize;
    }
    ok as f64 / m as f64
}

fn tilt(z: f64, lambda: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if lambda == 0.0 {
        1.0
    } else {
        z.powf(lambda)
    }
}

/// `Z_r` of one outer configuration.
pub fn z_trial(spec: &CampaignSpec, r: f64, rng: &mut Stream) -> Result<f64> {
    let (scene, _) = outer_configuration(spec, r, HARMONIC_DEPTH, rng)?;
    if disconnects_or_sealed(&scene) {
        return Ok(0.0);
    }
    match spec.z_method {
        ZMethod::Harmonic => harmonic_avoidance(&scene),
        ZMethod::InnerPaths => Ok(inner_path_avoidance(&scene, spec.inner_samples, &walk(spec), rng)),
    }
}

/// `E[Z_r^lambda]` for every `lambda` in `lambdas` from the same outer
/// configurations and inner samples; one fit per `lambda`.
pub fn estimate_zr_moments(spec: &CampaignSpec, lambdas: &[f64]) -> Result<Vec<ExponentFit>> {
    spec.validate()?;
    if lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::Domain("tilts must be nonnegative".into()));
    }
    let per_radius: Vec<Vec<Tally>> = spec
        .radii
        .iter()
        .map(|&r| {
            let tags = [TAG_Z, spec.k as u64, tag_f64(spec.c), tag_f64(r), spec.z_method as u64, spec.inner_samples as u64];
            run_trials(spec.seed, &tags, 0..spec.trials_per_radius, lambdas.len(), |rng| match z_trial(spec, r, rng) {
                Ok(z) => lambdas.iter().map(|&l| Some(tilt(z, l))).collect(),
                Err(_) => vec![None; lambdas.len()],
            })
        })
        .collect();
    (0..lambdas.len())
        .map(|j| {
            let t: Vec<Tally> = per_radius.iter().map(|v| v[j]).collect();
            fit_tallies(spec, &t, |_| 1.0)
        })
        .collect()
}

/// `E[Z_r^lambda]` at `spec.lambda`.
pub fn estimate_zr_moment(spec: &CampaignSpec) -> Result<ExponentFit> {
    if !(spec.lambda > 0.0) {
        return Err(Error::Domain(format!("estimate_zr_moment needs lambda > 0, got {}", spec.lambda)));
    }
    Ok(estimate_zr_moments(spec, &[spec.lambda])?.remove(0))
}

/// Two excursions across `A(0, r)` and the soup inside the annulus:
/// `exp(-lambda L)` for the smaller extremal distance `L` of the two sides.
pub fn b_tilde_trial(spec: &CampaignSpec, r: f64, lambdas: &[f64], rng: &mut Stream) -> Result<Vec<f64>> {
    let y1 = sample_excursion(0.0, r, spec.step, rng);
    let y2 = sample_excursion(0.0, r, spec.step, rng);
    let soup = annulus_soup(spec, r, rng)?;
    let pe = excursion_pair_extremal(&y1, &y2, &soup, spec.width)?;
    Ok(lambdas.iter().map(|&l| pe.lmin.tilt(l)).collect())
}

/// `r^-2 E[exp(-lambda L_r)]` per radius for every tilt; failed solves are
/// counted as attrition.
pub fn estimate_b_tildes(spec: &CampaignSpec, lambdas: &[f64]) -> Result<Vec<ExponentFit>> {
    spec.validate()?;
    if spec.k != 2 {
        return Err(Error::Domain(format!("estimate_b_tilde needs k = 2, got {}", spec.k)));
    }
    let per_radius: Vec<Vec<Tally>> = spec
        .radii
        .iter()
        .map(|&r| {
            run_trials(spec.seed, &[TAG_B, tag_f64(spec.c), tag_f64(r)], 0..spec.trials_per_radius, lambdas.len(), |rng| {
                match b_tilde_trial(spec, r, lambdas, rng) {
                    Ok(v) => v.into_iter().map(Some).collect(),
                    Err(_) => vec![None; lambdas.len()],
                }
            })
        })
        .collect();
    (0..lambdas.len())
        .map(|j| {
            let t: Vec<Tally> = per_radius.iter().map(|v| v[j]).collect();
            fit_tallies(spec, &t, |r| r.powi(-2))
        })
        .collect()
}

pub fn estimate_b_tilde(spec: &CampaignSpec, lambda: f64) -> Result<ExponentFit> {
    Ok(estimate_b_tildes(spec, &[lambda])?.remove(0))
}

/// Smallest `C` with `b_{s+r+1} <= C b_s b_r` over `(s, r)` in `{1, 2}^2`;
/// `None` unless radii 1 to 5 are all present.
pub fn submultiplicativity_constant(fit: &ExponentFit) -> Option<f64> {
    let at = |r: f64| fit.per_radius.iter().find(|e| (e.r - r).abs() < 1e-9).map(|e| e.estimate);
    let mut c: f64 = 0.0;
    for s in [1.0, 2.0] {
        for r in [1.0, 2.0] {
            c = c.max(at(s + r + 1.0)? / (at(s)? * at(r)?));
        }
    }
    Some(c)
}

/// Radial segments at angles `theta1 < theta2` through the tilted extremal
/// pipeline: measured `r^-2 exp(-lambda L)` and the wedge prediction with
/// `L = pi r / max(gap, 2 pi - gap)`.
pub fn radial_pair_b_tilde(r: f64, lambda: f64, theta1: f64, theta2: f64, width: usize) -> Result<(f64, f64)> {
    let grid = annulus_grid(width, 0.0, r);
    let seg = |t: f64| -> Vec<P2> { (0..=200).map(|i| [t, r * i as f64 / 200.0]).collect() };
    let (a, b) = excursion_obstacles(grid, &seg(theta1), &seg(theta2), None);
    let mut ob = a;
    ob.or_assign(&b);
    let pe = pair_extremal_on(&ob, theta1, theta2)?;
    let gap = (theta2 - theta1).rem_euclid(TAU);
    let l = std::f64::consts::PI * r / gap.max(TAU - gap);
    Ok((r.powi(-2) * pe.lmin.tilt(lambda), r.powi(-2) * (-lambda * l).exp()))
}

/// Separation statistics of one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepFrequency {
    pub r: f64,
    pub trials: u64,
    /// Trials in which the excursions and their clusters leave `C_0` connected to infinity.
    pub connected: u64,
    /// Connected trials that are also separated.
    pub separated: u64,
    pub frequency: f64,
    pub stderr: f64,
    /// Among connected trials: how many meet the landing, confinement and
    /// small-cluster conditions separately.
    pub landing: u64,
    pub confined: u64,
    pub small_clusters: u64,
}

/// `k` excursions across `A(0, r)` with the annulus soup: `None` when they
/// disconnect `C_0` from infinity, otherwise the separation report.
pub fn sep_trial(spec: &CampaignSpec, r: f64, alpha: f64, rng: &mut Stream) -> Result<Option<SepReport>> {
    let ys: Vec<ExcursionSample> = (0..spec.k).map(|_| sample_excursion(0.0, r, spec.step, rng)).collect();
    let soup = annulus_soup(spec, r, rng)?;
    let grid = Grid::cylinder(spec.width, -0.3, r + FRAME_MARGIN);
    let cs = log_polar_clusters(&soup, grid);
    let mut ras = OccupancyRaster::new(grid);
    for y in &ys {
        ras.add_polyline(&y.trace);
    }
    let ras = attach_clusters(&ras, &cs);
    if disconnects_or_sealed(&AnnulusScene { raster: ras, s: 0.0, r }) {
        return Ok(None);
    }
    let cfg = SepConfig {
        traces: ys.iter().map(|y| &y.trace[..]).collect(),
        clusters: if soup.is_empty() { None } else { Some(&cs) },
        grid,
        s: 0.0,
        r,
        alpha,
        cluster_factor: 0.01,
    };
    Ok(Some(alpha_sep_report(&cfg)))
}

/// Conditional frequency of the separation event given non-disconnection.
pub fn alpha_sep_frequency(spec: &CampaignSpec, alpha: f64) -> Result<Vec<SepFrequency>> {
    spec.validate()?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1/2)")));
    }
    if spec.radii.iter().any(|&r| r <= 1.0) {
        return Err(Error::Domain("separation needs r > 1".into()));
    }
    spec.radii
        .iter()
        .map(|&r| {
            let tags = [TAG_SEP, spec.k as u64, tag_f64(spec.c), tag_f64(r), tag_f64(alpha)];
            let t = run_trials(spec.seed, &tags, 0..spec.trials_per_radius, 5, |rng| match sep_trial(spec, r, alpha, rng) {
                Ok(None) => vec![Some(0.0); 5],
                Ok(Some(rep)) => {
                    let b = |x: bool| Some(x as u8 as f64);
                    vec![Some(1.0), b(rep.all()), b(rep.landing), b(rep.confined), b(rep.small_clusters)]
                }
                Err(_) => vec![None; 5],
            });
            let n = t[0].successes;
            let q = if n > 0 { t[1].successes as f64 / n as f64 } else { 0.0 };
            Ok(SepFrequency {
                r,
                trials: t[0].trials,
                connected: n,
                separated: t[1].successes,
                frequency: q,
                stderr: if n > 0 { (q * (1.0 - q) / n as f64).sqrt() } else { 0.0 },
                landing: t[2].successes,
                confined: t[3].successes,
                small_clusters: t[4].successes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn harmonic_avoidance_of_an_empty_scene_is_one() {
        let scene = AnnulusScene::new(64, 0.0, 2.0, HARMONIC_DEPTH);
        let z = harmonic_avoidance(&scene).unwrap();
        assert!((z - 1.0).abs() < 1e-9, "{z}");
    }

    #[test]
    fn sealed_scene_has_zero_avoidance() {
        let mut scene = AnnulusScene::new(64, 0.0, 2.0, HARMONIC_DEPTH);
        scene.add_polyline(&[[0.0, 1.0], [TAU, 1.0]]);
        assert_eq!(harmonic_avoidance(&scene).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_and_inner_paths_agree() {
        let mut scene = AnnulusScene::new(128, 0.0, 1.5, HARMONIC_DEPTH);
        scene.add_polyline(&[[1.0, 0.2], [1.0, 1.5]]);
        scene.add_polyline(&[[2.0, 0.7], [5.0, 0.7]]);
        let h = harmonic_avoidance(&scene).unwrap();
        let mut rng = stream(5, &[], 0);
        let m = 3000;
        let q = inner_path_avoidance(&scene, m, &Walk::new(0.01, PATH_FLOOR), &mut rng);
        let se = (q * (1.0 - q) / m as f64).sqrt();
        assert!((h - q).abs() < 3.0 * se + 0.02, "harmonic {h} vs paths {q}");
    }

    #[test]
    fn radial_pair_matches_wedge_formula() {
        let (m, f) = radial_pair_b_tilde(2.0, 0.5, 0.3, 2.3, 256).unwrap();
        assert!((m / f - 1.0).abs() < 0.1, "{m} {f}");
    }

    #[test]
    fn tilt_conventions() {
        assert_eq!(tilt(0.0, 0.0), 0.0);
        assert_eq!(tilt(0.3, 0.0), 1.0);
        assert!((tilt(0.25, 0.5) - 0.5).abs() < 1e-15);
    }
}
