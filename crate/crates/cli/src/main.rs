use clap::Parser;
use loopsoup_cli::commands::{run, RunError};
use loopsoup_cli::config::{parse_config, Command, ConfigError};
use loopsoup_cli::exit;
use std::path::PathBuf;
use std::time::Instant;

/// Loop-soup experiments: exponent formulas, soups and clusters,
/// disconnection campaigns, tilted moments, extremal distances, dimensions.
#[derive(Parser, Debug)]
#[command(name = "loopsoup", version)]
struct Cli {
    /// One of: formulas, sample, clusters, disconnect, ztilt, btilde, dims,
    /// extremal-tests, fkg.
    command: String,
    /// Flat `key = value` config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key (repeatable), e.g. `--set radii=1,2,3`.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed (same as `--set seed=N`).
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per radius, or soup draws for `fkg` (same as `--set trials=N`).
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads, 0 for one per core (same as `--set workers=N`).
    #[arg(short, long)]
    workers: Option<usize>,
    /// Output directory (default: $LOOPSOUP_OUT or the current directory).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit::CONFIG;
        }
    };
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return exit::CONFIG;
            }
        },
        None => None,
    };
    let mut overrides = Vec::new();
    let mut bad = Vec::new();
    for s in &cli.set {
        match s.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
            None => bad.push(format!("--set `{s}`: expected KEY=VALUE")),
        }
    }
    if !bad.is_empty() {
        eprint!("{}", ConfigError::Parse(bad));
        return exit::CONFIG;
    }
    if let Some(v) = cli.seed {
        overrides.push(("seed".into(), v.to_string()));
    }
    if let Some(v) = cli.trials {
        overrides.push(("trials".into(), v.to_string()));
    }
    if let Some(v) = cli.workers {
        overrides.push(("workers".into(), v.to_string()));
    }
    if let Some(v) = &cli.out {
        overrides.push(("out_dir".into(), v.display().to_string()));
    }
    let cfg = match parse_config(command, text.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return exit::CONFIG;
        }
    };
    if cfg.params.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.params.workers).build_global() {
            eprintln!("worker pool: {e}");
            return exit::RUNTIME;
        }
    }
    let t = Instant::now();
    match run(&cfg) {
        Ok(out) => {
            println!("{}", out.summary);
            eprintln!("wrote {} and {} in {:.1}s", out.csv.display(), out.json.display(), t.elapsed().as_secs_f64());
            if out.threshold_failed {
                exit::THRESHOLD
            } else {
                exit::OK
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("invalid configuration: {e}");
            exit::CONFIG
        }
        Err(RunError::Runtime(e)) => {
            eprintln!("error: {e}");
            exit::RUNTIME
        }
    }
}
