//! Flat `key = value` run configuration.
//!
//! Values come from three layers applied in order: built-in defaults, an
//! optional config file, then command-line flags. Unknown keys are rejected
//! and every problem is reported at once.

use loopsoup::estimators::{CampaignSpec, KnConfig, ZMethod};
use loopsoup::geom::Rect;
use loopsoup::sampler::{SoupConfig, Surface};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "LOOPSOUP_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Formulas,
    Sample,
    Clusters,
    Disconnect,
    Ztilt,
    Btilde,
    Dims,
    ExtremalTests,
    Fkg,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Formulas,
        Command::Sample,
        Command::Clusters,
        Command::Disconnect,
        Command::Ztilt,
        Command::Btilde,
        Command::Dims,
        Command::ExtremalTests,
        Command::Fkg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Formulas => "formulas",
            Command::Sample => "sample",
            Command::Clusters => "clusters",
            Command::Disconnect => "disconnect",
            Command::Ztilt => "ztilt",
            Command::Btilde => "btilde",
            Command::Dims => "dims",
            Command::ExtremalTests => "extremal-tests",
            Command::Fkg => "fkg",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which probability the `disconnect` subcommand estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// `k` crossings and their clusters leave `C_0` connected to infinity.
    P0,
    /// One path cut at its last visit to `C_0` does not disconnect it.
    Dr,
    /// Conditional frequency of the separation event.
    Sep,
}

/// Every parameter the binary understands, with its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub seed: u64,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    pub out_dir: String,
    /// Threshold check: exit with status 4 if the fitted slope is farther
    /// than `tolerance` from `expect`.
    pub expect: Option<f64>,
    pub tolerance: Option<f64>,

    // formulas
    pub steps: usize,

    // soups
    pub c: f64,
    pub region: [f64; 4],
    pub surface: Surface,
    pub t_min: f64,
    pub t_max: f64,
    pub cell: f64,

    // campaigns
    pub k: usize,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub radii: Vec<f64>,
    pub trials: u64,
    pub inner_samples: usize,
    pub z_method: ZMethod,
    pub width: usize,
    pub step: f64,
    pub t_min_factor: f64,
    pub t_max_scale: f64,
    pub soup_depth: f64,
    pub drop_smallest: bool,
    pub min_successes: u64,
    pub event: Event,
    pub alpha: f64,
    /// If positive, `disconnect` also reruns with `t_max` scaled by this factor.
    pub cutoff_factor: f64,

    // dims
    pub j: u32,
    pub n_values: Vec<u32>,
    pub fine_exp: u32,
    pub coarse_exp: u32,
    pub t_lo: f64,
    pub t_hi: f64,
    pub loops: u64,
    pub soup_t_min: f64,
    pub soup_t_max: f64,

    // fkg
    pub annulus1: [f64; 2],
    pub annulus2: [f64; 2],
    pub harness: u64,

    // extremal-tests
    pub h: f64,
    pub across: usize,
}

impl Default for Params {
    fn default() -> Self {
        let kn = KnConfig::default();
        Params {
            seed: 1,
            workers: 0,
            out_dir: std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| ".".into()),
            expect: None,
            tolerance: None,
            steps: 10,
            c: 0.0,
            region: [-1.0, -1.0, 1.0, 1.0],
            surface: Surface::Plane,
            t_min: 1e-3,
            t_max: 0.25,
            cell: 0.01,
            k: 2,
            lambda: 0.0,
            lambdas: vec![0.05, 0.5, 1.0],
            radii: vec![1.0, 2.0, 3.0],
            trials: 1000,
            inner_samples: 50,
            z_method: ZMethod::Harmonic,
            width: 256,
            step: 0.02,
            t_min_factor: 4.0,
            t_max_scale: 2.0,
            soup_depth: 1.0,
            drop_smallest: false,
            min_successes: 10,
            event: Event::P0,
            alpha: 0.05,
            cutoff_factor: 0.0,
            j: kn.j,
            n_values: kn.n_values,
            fine_exp: kn.fine_exp,
            coarse_exp: kn.coarse_exp,
            t_lo: kn.t_lo,
            t_hi: kn.t_hi,
            loops: 20,
            soup_t_min: kn.soup_t_min,
            soup_t_max: kn.soup_t_max,
            annulus1: [0.1, 0.3],
            annulus2: [0.5, 0.9],
            harness: 100,
            h: 0.02,
            across: 64,
        }
    }
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("cannot parse `{}`", v.trim()))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

fn fixed<const N: usize>(v: &str) -> Result<[f64; N], String> {
    let xs: Vec<f64> = list(v)?;
    xs.try_into().map_err(|xs: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", xs.len()))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        o => Err(format!("expected true or false, got `{o}`")),
    }
}

impl Params {
    /// Set one key from its text value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = num(v)?,
            "workers" => self.workers = num(v)?,
            "out_dir" => self.out_dir = v.trim().to_string(),
            "expect" => self.expect = Some(num(v)?),
            "tolerance" => self.tolerance = Some(num(v)?),
            "steps" => self.steps = num(v)?,
            "c" => self.c = num(v)?,
            "region" => self.region = fixed(v)?,
            "surface" => {
                self.surface = match v.trim() {
                    "plane" => Surface::Plane,
                    "cylinder" => Surface::Cylinder,
                    o => return Err(format!("expected plane or cylinder, got `{o}`")),
                }
            }
            "t_min" => self.t_min = num(v)?,
            "t_max" => self.t_max = num(v)?,
            "cell" => self.cell = num(v)?,
            "k" => self.k = num(v)?,
            "lambda" => self.lambda = num(v)?,
            "lambdas" => self.lambdas = list(v)?,
            "radii" => self.radii = list(v)?,
            "trials" => self.trials = num(v)?,
            "inner_samples" => self.inner_samples = num(v)?,
            "z_method" => {
                self.z_method = match v.trim() {
                    "harmonic" => ZMethod::Harmonic,
                    "paths" | "inner_paths" => ZMethod::InnerPaths,
                    o => return Err(format!("expected harmonic or paths, got `{o}`")),
                }
            }
            "width" => self.width = num(v)?,
            "step" => self.step = num(v)?,
            "t_min_factor" => self.t_min_factor = num(v)?,
            "t_max_scale" => self.t_max_scale = num(v)?,
            "soup_depth" => self.soup_depth = num(v)?,
            "drop_smallest" => self.drop_smallest = boolean(v)?,
            "min_successes" => self.min_successes = num(v)?,
            "event" => {
                self.event = match v.trim() {
                    "p0" => Event::P0,
                    "dr" => Event::Dr,
                    "sep" => Event::Sep,
                    o => return Err(format!("expected p0, dr or sep, got `{o}`")),
                }
            }
            "alpha" => self.alpha = num(v)?,
            "cutoff_factor" => self.cutoff_factor = num(v)?,
            "j" => self.j = num(v)?,
            "n_values" => self.n_values = list(v)?,
            "fine_exp" => self.fine_exp = num(v)?,
            "coarse_exp" => self.coarse_exp = num(v)?,
            "t_lo" => self.t_lo = num(v)?,
            "t_hi" => self.t_hi = num(v)?,
            "loops" => self.loops = num(v)?,
            "soup_t_min" => self.soup_t_min = num(v)?,
            "soup_t_max" => self.soup_t_max = num(v)?,
            "annulus1" => self.annulus1 = fixed(v)?,
            "annulus2" => self.annulus2 = fixed(v)?,
            "harness" => self.harness = num(v)?,
            "h" => self.h = num(v)?,
            "across" => self.across = num(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn campaign(&self) -> CampaignSpec {
        CampaignSpec {
            c: self.c,
            k: self.k,
            lambda: self.lambda,
            radii: self.radii.clone(),
            trials_per_radius: self.trials,
            inner_samples: self.inner_samples,
            z_method: self.z_method,
            width: self.width,
            step: self.step,
            t_min_factor: self.t_min_factor,
            t_max_scale: self.t_max_scale,
            soup_depth: self.soup_depth,
            seed: self.seed,
            drop_smallest: self.drop_smallest,
            min_successes: self.min_successes,
        }
    }

    pub fn soup(&self) -> SoupConfig {
        let [x0, y0, x1, y1] = self.region;
        match self.surface {
            Surface::Plane => SoupConfig::plane(self.c, Rect::new(x0, y0, x1, y1), self.t_min, self.t_max, self.seed),
            Surface::Cylinder => SoupConfig::cylinder(self.c, y0, y1, self.t_min, self.t_max, self.seed),
        }
    }

    pub fn kn(&self) -> KnConfig {
        KnConfig {
            j: self.j,
            k: self.k,
            n_values: self.n_values.clone(),
            fine_exp: self.fine_exp,
            coarse_exp: self.coarse_exp,
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            c: self.c,
            soup_t_min: self.soup_t_min,
            soup_t_max: self.soup_t_max,
        }
    }
}

/// A parsed and validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed input or unknown keys.
    Parse(Vec<String>),
    /// Well-formed but invalid values.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (what, msgs) = match self {
            ConfigError::Parse(m) => ("configuration error", m),
            ConfigError::Invalid(m) => ("invalid configuration", m),
        };
        writeln!(f, "{what}:")?;
        for m in msgs {
            writeln!(f, "  - {m}")?;
        }
        Ok(())
    }
}

/// Split config file text into `(line, key, value)` entries. Blank lines and
/// `#` comments are skipped.
pub fn parse_text(text: &str) -> Result<Vec<(usize, String, String)>, Vec<String>> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => out.push((i + 1, k.trim().to_string(), v.trim().to_string())),
            _ => errs.push(format!("line {}: expected `key = value`, got `{}`", i + 1, line)),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Build a run from defaults, then the file text, then `key=value` overrides.
pub fn parse_config(command: Command, file: Option<&str>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut p = Params::default();
    let mut errs = Vec::new();
    if let Some(text) = file {
        match parse_text(text) {
            Ok(entries) => {
                for (line, k, v) in entries {
                    if let Err(e) = p.set(&k, &v) {
                        errs.push(format!("line {line}: key `{k}`: {e}"));
                    }
                }
            }
            Err(e) => errs.extend(e),
        }
    }
    for (k, v) in overrides {
        if let Err(e) = p.set(k, v) {
            errs.push(format!("flag `{k}`: {e}"));
        }
    }
    if !errs.is_empty() {
        return Err(ConfigError::Parse(errs));
    }
    let cfg = RunConfig { command, params: p };
    let bad = validate(&cfg);
    if bad.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(bad))
    }
}

fn module_errors(r: loopsoup::Result<()>) -> Vec<String> {
    match r {
        Ok(()) => Vec::new(),
        Err(loopsoup::Error::InvalidConfig(v)) => v,
        Err(e) => vec![e.to_string()],
    }
}

/// All violations of the run, including those reported by the owning module.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let p = &cfg.params;
    let mut bad = Vec::new();
    if p.tolerance.is_some_and(|t| !(t > 0.0)) {
        bad.push("tolerance must be positive".into());
    }
    if p.tolerance.is_some() != p.expect.is_some() {
        bad.push("expect and tolerance must be given together".into());
    }
    match cfg.command {
        Command::Formulas => {
            if p.steps == 0 {
                bad.push("steps must be at least 1".into());
            }
        }
        Command::Sample | Command::Clusters | Command::Fkg => {
            bad.extend(module_errors(p.soup().validate()));
            if !(p.cell > 0.0) {
                bad.push(format!("cell = {} must be positive", p.cell));
            }
            if cfg.command == Command::Fkg {
                for (name, a) in [("annulus1", p.annulus1), ("annulus2", p.annulus2)] {
                    if !(a[0] > 0.0 && a[1] > a[0]) {
                        bad.push(format!("{name} = {a:?} needs 0 < r_in < r_out"));
                    }
                }
                if p.trials < 2 {
                    bad.push(format!("trials = {} below 2", p.trials));
                }
            }
        }
        Command::Disconnect | Command::Ztilt | Command::Btilde => {
            bad.extend(module_errors(p.campaign().validate()));
            if cfg.command == Command::Disconnect && p.event == Event::Sep && !(p.alpha > 0.0 && p.alpha < 0.5) {
                bad.push(format!("alpha = {} outside (0, 1/2)", p.alpha));
            }
            if cfg.command == Command::Btilde && p.k != 2 {
                bad.push(format!("k = {} but btilde needs k = 2", p.k));
            }
            if cfg.command != Command::Disconnect && p.lambdas.is_empty() {
                bad.push("lambdas is empty".into());
            }
            if p.lambdas.iter().any(|&l| !(l >= 0.0)) {
                bad.push("lambdas must be nonnegative".into());
            }
            if p.cutoff_factor < 0.0 {
                bad.push(format!("cutoff_factor = {} must be nonnegative", p.cutoff_factor));
            }
        }
        Command::Dims => {
            bad.extend(module_errors(p.kn().validate()));
            if p.loops < 3 {
                bad.push(format!("loops = {} below 3", p.loops));
            }
        }
        Command::ExtremalTests => {
            if !(p.h > 0.0 && p.h <= 0.1) {
                bad.push(format!("h = {} outside (0, 0.1]", p.h));
            }
            if p.across < 8 {
                bad.push(format!("across = {} below 8", p.across));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_defaults() {
        let cfg = parse_config(Command::Formulas, Some(""), &[]).unwrap();
        assert_eq!(cfg.params, Params::default());
    }

    #[test]
    fn comments_and_blank_lines() {
        let e = parse_text("# header\n\nc = 0.5  # trailing\nk=1\n").unwrap();
        assert_eq!(e, vec![(3, "c".into(), "0.5".into()), (4, "k".into(), "1".into())]);
    }

    #[test]
    fn bad_lines_are_numbered() {
        let err = parse_config(Command::Disconnect, Some("c = 0\nnonsense\nfoo = 3\nk = x\n"), &[]).unwrap_err();
        match err {
            ConfigError::Parse(v) => {
                assert_eq!(v.len(), 1, "{v:?}");
                assert!(v[0].contains("line 2"));
            }
            e => panic!("{e:?}"),
        }
        let err = parse_config(Command::Disconnect, Some("foo = 3\nk = x\n"), &[]).unwrap_err();
        match err {
            ConfigError::Parse(v) => {
                assert_eq!(v.len(), 2, "{v:?}");
                assert!(v[0].contains("line 1") && v[0].contains("foo") && v[0].contains("unknown"));
                assert!(v[1].contains("line 2") && v[1].contains("`k`"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn flags_override_the_file() {
        let file = "radii = 1, 2, 4\ntrials = 500\n";
        let cfg = parse_config(Command::Disconnect, Some(file), &[("trials".into(), "2000".into())]).unwrap();
        assert_eq!(cfg.params.radii, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.params.trials, 2000);
    }

    #[test]
    fn negative_t_min_names_the_key() {
        let err = parse_config(Command::Sample, Some("c = 1\nt_min = -0.1\n"), &[]).unwrap_err();
        match err {
            ConfigError::Invalid(v) => assert!(v.iter().any(|m| m.contains("t_min")), "{v:?}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let err = parse_config(Command::Disconnect, Some("c = 3\nk = 0\nradii = 0.5\ntrials = 5\n"), &[]).unwrap_err();
        match err {
            ConfigError::Invalid(v) => assert!(v.len() >= 4, "{v:?}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn subcommand_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }
}
