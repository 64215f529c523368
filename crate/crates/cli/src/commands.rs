//! One function per subcommand. Each writes `<out_dir>/<command>.csv` and
//! `<out_dir>/<command>.json` and returns a one-line summary.

use crate::config::{Command, Event, Params, RunConfig};
use crate::output::{write_csv, write_json};
use loopsoup::clusters::{build_clusters, build_clusters_on, ClusterOptions};
use loopsoup::estimators::{
    alpha_sep_frequency, campaign_rows, dimension_campaign, estimate_b_tildes, estimate_dr, estimate_p0, estimate_zr_moments,
    fkg_check, submultiplicativity_constant, ExponentFit, NoCrossing, SepFrequency,
};
use loopsoup::exponents::{formula_table, xi};
use loopsoup::extremal::{cartesian_annulus, cartesian_wedge, extremal_distance, rectangle, GridDomain};
use loopsoup::geom::{Rect, TAU};
use loopsoup::raster::Grid;
use loopsoup::sampler::{sample_loop_soup_seeded, Surface};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum RunError {
    /// Invalid parameters detected by a module at run time.
    Config(String),
    Runtime(String),
}

impl From<loopsoup::Error> for RunError {
    fn from(e: loopsoup::Error) -> Self {
        match e {
            loopsoup::Error::InvalidConfig(_) | loopsoup::Error::Resolution(_) => RunError::Config(e.to_string()),
            e => RunError::Runtime(e.to_string()),
        }
    }
}

impl From<String> for RunError {
    fn from(e: String) -> Self {
        RunError::Runtime(e)
    }
}

pub struct Outcome {
    pub summary: String,
    /// The run completed but missed its threshold.
    pub threshold_failed: bool,
    pub csv: PathBuf,
    pub json: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopRow {
    pub index: usize,
    pub root_x: f64,
    pub root_y: f64,
    pub duration: f64,
    pub points: usize,
    pub winding: i32,
    pub contained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimsRow {
    pub n: u32,
    pub mean_count: f64,
    pub count_stderr: f64,
    pub hit_probability: f64,
    pub hit_stderr: f64,
    pub first_moment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FkgRow {
    pub trials: u64,
    pub pa: f64,
    pub pb: f64,
    pub pab: f64,
    pub stderr: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalRow {
    pub case: String,
    pub computed: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn paths(p: &Params, cmd: Command) -> (PathBuf, PathBuf) {
    let dir = Path::new(&p.out_dir);
    (dir.join(format!("{}.csv", cmd.name())), dir.join(format!("{}.json", cmd.name())))
}

fn fit_json(f: &ExponentFit) -> Value {
    json!({ "slope": f.slope, "intercept": f.intercept, "stderr": f.stderr })
}

/// `(slope - oracle) / stderr`, or `None` without an oracle or error bar.
fn z_score(slope: f64, stderr: f64, oracle: Option<f64>) -> Option<f64> {
    oracle.filter(|_| stderr > 0.0).map(|o| (slope - o) / stderr)
}

fn threshold(p: &Params, value: f64) -> bool {
    match (p.expect, p.tolerance) {
        (Some(e), Some(t)) => (value - e).abs() > t,
        _ => false,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.4}"))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let p = &cfg.params;
    std::fs::create_dir_all(&p.out_dir).map_err(|e| RunError::Runtime(format!("{}: {e}", p.out_dir)))?;
    let (csv, json_path) = paths(p, cfg.command);
    let (summary, threshold_failed, extra) = match cfg.command {
        Command::Formulas => formulas(p, &csv)?,
        Command::Sample => sample(p, &csv)?,
        Command::Clusters => clusters(p, &csv)?,
        Command::Disconnect => disconnect(p, &csv)?,
        Command::Ztilt => ztilt(p, &csv)?,
        Command::Btilde => btilde(p, &csv)?,
        Command::Dims => dims(p, &csv)?,
        Command::ExtremalTests => extremal_tests(p, &csv)?,
        Command::Fkg => fkg(p, &csv)?,
    };
    let doc = json!({ "config": cfg, "summary": summary, "result": extra, "threshold_failed": threshold_failed });
    write_json(&json_path, &doc)?;
    Ok(Outcome { summary, threshold_failed, csv, json: json_path })
}

type Step = (String, bool, Value);

fn formulas(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let rows = formula_table(p.steps)?;
    write_csv(csv, &rows)?;
    let last = rows.last().expect("at least two rows");
    Ok((
        format!("formulas: {} rows, xi(0,2) = {:.6}, xi(1,2) = {:.6}", rows.len(), rows[0].xi2, last.xi2),
        false,
        json!({ "rows": rows.len() }),
    ))
}

fn sample(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let soup = p.soup();
    let loops = sample_loop_soup_seeded(&soup)?;
    let rows: Vec<LoopRow> = loops
        .iter()
        .enumerate()
        .map(|(i, l)| LoopRow {
            index: i,
            root_x: l.root[0],
            root_y: l.root[1],
            duration: l.duration,
            points: l.trace.len(),
            winding: l.winding,
            contained: l.contained,
        })
        .collect();
    write_csv(csv, &rows)?;
    let traces = csv.with_file_name("sample_loops.json");
    let f = std::fs::File::create(&traces).map_err(|e| format!("{}: {e}", traces.display()))?;
    loopsoup::sampler::io::write_json(std::io::BufWriter::new(f), &soup, &loops)?;
    Ok((
        format!("sample: {} loops (c = {}, t in [{}, {}])", loops.len(), p.c, p.t_min, p.t_max),
        false,
        json!({ "loops": loops.len(), "traces": traces }),
    ))
}

fn clusters(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let soup = p.soup();
    let loops = sample_loop_soup_seeded(&soup)?;
    let cs = match soup.surface {
        Surface::Plane => build_clusters(&loops, p.cell),
        Surface::Cylinder => {
            let bb = loops.iter().map(|l| l.bbox()).reduce(|a, b| a.union(&b)).unwrap_or(Rect::new(0.0, 0.0, TAU, 1.0));
            let width = (TAU / p.cell).round().max(16.0) as usize;
            build_clusters_on(&loops, Grid::cylinder(width, bb.y0 - p.cell, bb.y1 + p.cell), ClusterOptions { exact_diameter: false, log_polar: true })
        }
    };
    let rows = cs.summary();
    write_csv(csv, &rows)?;
    let largest = rows.iter().map(|r| r.size).max().unwrap_or(0);
    let diam = rows.iter().map(|r| r.diameter).fold(0.0, f64::max);
    Ok((
        format!("clusters: {} loops in {} clusters, largest {} loops, max diameter {:.4}", loops.len(), rows.len(), largest, diam),
        false,
        json!({ "loops": loops.len(), "clusters": rows.len(), "largest": largest, "max_diameter": diam }),
    ))
}

fn disconnect(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let spec = p.campaign();
    match p.event {
        Event::P0 => {
            let fit = estimate_p0(&spec)?;
            write_csv(csv, &campaign_rows(&spec, 0.0, &fit))?;
            let oracle = xi(p.c, p.k as f64).ok();
            let z = z_score(fit.slope, fit.stderr, oracle);
            let mut extra = json!({ "fit": fit_json(&fit), "oracle": oracle, "z_score": z });
            let mut line = format!(
                "disconnect c={} k={}: slope {:.4} +- {:.4}, oracle {}, z = {}",
                p.c, p.k, fit.slope, fit.stderr, fmt_opt(oracle), fmt_opt(z)
            );
            if p.cutoff_factor > 0.0 {
                let wide = loopsoup::estimators::CampaignSpec { t_max_scale: spec.t_max_scale * p.cutoff_factor.sqrt(), ..spec.clone() };
                let wf = estimate_p0(&wide)?;
                extra["cutoff_sweep"] = json!({ "factor": p.cutoff_factor, "fit": fit_json(&wf), "shift": wf.slope - fit.slope });
                line.push_str(&format!("; t_max x{}: slope {:.4} (shift {:+.4})", p.cutoff_factor, wf.slope, wf.slope - fit.slope));
            }
            Ok((line, threshold(p, fit.slope), extra))
        }
        Event::Dr => {
            let fit = estimate_dr(&spec)?;
            write_csv(csv, &campaign_rows(&spec, 0.0, &fit))?;
            let z = z_score(fit.slope, fit.stderr, Some(-1.0));
            Ok((
                format!("disconnect event=dr: log-log slope {:.4} +- {:.4}, oracle -1, z = {}", fit.slope, fit.stderr, fmt_opt(z)),
                threshold(p, fit.slope),
                json!({ "fit": fit_json(&fit), "oracle": -1.0, "z_score": z }),
            ))
        }
        Event::Sep => {
            let rows: Vec<SepFrequency> = alpha_sep_frequency(&spec, p.alpha)?;
            write_csv(csv, &rows)?;
            let parts: Vec<String> = rows.iter().map(|s| format!("r={} {:.4} +- {:.4}", s.r, s.frequency, s.stderr)).collect();
            let min = rows.iter().map(|s| s.frequency).fold(f64::INFINITY, f64::min);
            Ok((
                format!("disconnect event=sep alpha={}: {}", p.alpha, parts.join(", ")),
                threshold(p, min),
                json!({ "frequencies": rows }),
            ))
        }
    }
}

fn tilted_rows(spec: &loopsoup::estimators::CampaignSpec, lambdas: &[f64], fits: &[ExponentFit]) -> Vec<loopsoup::estimators::CampaignRow> {
    lambdas.iter().zip(fits).flat_map(|(&l, f)| campaign_rows(spec, l, f)).collect()
}

fn ztilt(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let spec = p.campaign();
    let fits = estimate_zr_moments(&spec, &p.lambdas)?;
    write_csv(csv, &tilted_rows(&spec, &p.lambdas, &fits))?;
    let parts: Vec<String> = p.lambdas.iter().zip(&fits).map(|(l, f)| format!("lambda={l}: {:.4} +- {:.4}", f.slope, f.stderr)).collect();
    let extra: Vec<Value> = p.lambdas.iter().zip(&fits).map(|(l, f)| json!({ "lambda": l, "fit": fit_json(f) })).collect();
    Ok((format!("ztilt c={} k={}: {}", p.c, p.k, parts.join(", ")), threshold(p, fits[0].slope), json!({ "fits": extra })))
}

fn btilde(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let spec = p.campaign();
    let fits = estimate_b_tildes(&spec, &p.lambdas)?;
    write_csv(csv, &tilted_rows(&spec, &p.lambdas, &fits))?;
    let parts: Vec<String> = p.lambdas.iter().zip(&fits).map(|(l, f)| format!("lambda={l}: {:.4} +- {:.4}", f.slope, f.stderr)).collect();
    let extra: Vec<Value> = p
        .lambdas
        .iter()
        .zip(&fits)
        .map(|(l, f)| json!({ "lambda": l, "fit": fit_json(f), "submultiplicativity_constant": submultiplicativity_constant(f) }))
        .collect();
    Ok((format!("btilde c={}: {}", p.c, parts.join(", ")), threshold(p, fits[0].slope), json!({ "fits": extra })))
}

fn dims(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let kn = p.kn();
    let x = xi(p.c, 2.0 * p.k as f64)?;
    let rep = dimension_campaign(&kn, p.loops, p.seed, x)?;
    let rows: Vec<DimsRow> = (0..rep.n_values.len())
        .map(|i| DimsRow {
            n: rep.n_values[i],
            mean_count: rep.mean_counts[i],
            count_stderr: rep.count_stderr[i],
            hit_probability: rep.hit_probability[i],
            hit_stderr: rep.hit_stderr[i],
            first_moment: rep.first_moment[i],
        })
        .collect();
    write_csv(csv, &rows)?;
    let oracle = 2.0 - x;
    let z = z_score(rep.dimension, rep.dimension_stderr, Some(oracle));
    Ok((
        format!(
            "dims c={} k={}: dimension {:.4} +- {:.4}, oracle {:.4}, z = {}; hitting slope {:.3} +- {:.3}",
            p.c,
            p.k,
            rep.dimension,
            rep.dimension_stderr,
            oracle,
            fmt_opt(z),
            rep.hitting_slope,
            rep.hitting_stderr
        ),
        threshold(p, rep.dimension),
        json!({ "report": rep, "oracle": oracle, "z_score": z }),
    ))
}

/// Finest-grid value of a domain with a known distance.
fn analytic_case(name: &str, dom: &GridDomain, exact: f64, tol: f64) -> Result<ExtremalRow, RunError> {
    let r = extremal_distance(dom)?;
    let computed = r.value.finite().ok_or_else(|| format!("{name}: arcs are disconnected"))?;
    let rel_error = (computed - exact).abs() / exact;
    Ok(ExtremalRow { case: name.into(), computed, exact, rel_error, tolerance: tol, pass: rel_error <= tol })
}

/// The analytic cases: rectangle, wedge and full annulus.
pub fn extremal_rows(h: f64, across: usize) -> Result<Vec<ExtremalRow>, RunError> {
    Ok(vec![
        analytic_case("rectangle 1.5pi x pi", &rectangle(1.5 * PI, across), 1.5 * PI, 0.01)?,
        analytic_case("wedge opening pi/2, A(0,1)", &cartesian_wedge(PI / 4.0, 0.0, 1.0, h), 2.0, 0.02)?,
        analytic_case("annulus A(0,1)", &cartesian_annulus(0.0, 1.0, h), 0.5, 0.02)?,
    ])
}

fn extremal_tests(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let rows = extremal_rows(p.h, p.across)?;
    write_csv(csv, &rows)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let parts: Vec<String> = rows.iter().map(|r| format!("{} {:.2}%", r.case, 100.0 * r.rel_error)).collect();
    Ok((
        format!("extremal-tests: {}/{} within tolerance ({})", rows.len() - failed, rows.len(), parts.join(", ")),
        failed > 0,
        json!({ "rows": rows }),
    ))
}

fn fkg(p: &Params, csv: &Path) -> Result<Step, RunError> {
    let soup = p.soup();
    let a = NoCrossing { center: [0.0, 0.0], r_in: p.annulus1[0], r_out: p.annulus1[1], cell: p.cell };
    let b = NoCrossing { center: [0.0, 0.0], r_in: p.annulus2[0], r_out: p.annulus2[1], cell: p.cell };
    let r = fkg_check(&a, &b, &soup, p.trials, p.harness, p.seed)?;
    let row = FkgRow { trials: r.trials, pa: r.pa, pb: r.pb, pab: r.pab, stderr: r.stderr, holds: r.holds };
    write_csv(csv, &[row])?;
    Ok((
        format!(
            "fkg: P(A) = {:.4}, P(B) = {:.4}, P(AB) = {:.4} vs P(A)P(B) = {:.4} (stderr {:.4}): {}",
            r.pa,
            r.pb,
            r.pab,
            r.pa * r.pb,
            r.stderr,
            if r.holds { "holds" } else { "violated" }
        ),
        !r.holds,
        json!({ "report": r }),
    ))
}
