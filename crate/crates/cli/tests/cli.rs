use loopsoup::clusters::ClusterSummary;
use loopsoup::estimators::CampaignRow;
use loopsoup::exponents::FormulaRow;
use loopsoup_cli::commands::{ExtremalRow, LoopRow};
use loopsoup_cli::output::{read_csv, write_csv};
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopsoup"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LOOPSOUP_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn formulas_writes_eleven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["formulas"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<FormulaRow> = read_csv(&dir.path().join("formulas.csv")).unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].c, 0.0);
    assert_eq!(rows[10].c, 1.0);
    assert!((rows[0].xi2 - 2.0 / 3.0).abs() < 1e-12);
    let summary = String::from_utf8(o.stdout).unwrap();
    assert_eq!(summary.lines().count(), 1);
}

#[test]
fn disconnect_smoke_replays_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["disconnect", "--set", "c=0", "--set", "k=2", "--set", "radii=1,2,3", "--trials", "200", "--seed", "9"];
    let t = std::time::Instant::now();
    let oa = bin(&args, a.path());
    assert!(t.elapsed().as_secs() < 60);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    let mut more = args.to_vec();
    more.extend(["--workers", "1"]);
    let ob = bin(&more, b.path());
    assert_eq!(ob.status.code(), Some(0));
    let ca = std::fs::read(a.path().join("disconnect.csv")).unwrap();
    let cb = std::fs::read(b.path().join("disconnect.csv")).unwrap();
    assert_eq!(ca, cb);
    let rows: Vec<CampaignRow> = read_csv(&a.path().join("disconnect.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.trials == 200 && (0.0..=1.0).contains(&r.successes_or_mean)));
    // p is nonincreasing in r
    assert!(rows[2].successes_or_mean <= rows[0].successes_or_mean);
}

#[test]
fn summary_embeds_the_config_and_flags_beat_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# smoke\nradii = 1, 2, 3\ntrials = 150\nk = 1\n").unwrap();
    let o = bin(&["disconnect", "--config", cfg.to_str().unwrap(), "--trials", "120"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&dir.path().join("disconnect.json"));
    let p = &j["config"]["params"];
    assert_eq!(p["trials"], 120);
    assert_eq!(p["k"], 1);
    assert_eq!(p["radii"], serde_json::json!([1.0, 2.0, 3.0]));
    assert_eq!(j["config"]["command"], "disconnect");
    assert!(j["result"]["fit"]["slope"].is_f64());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["disconnect", "--set", "bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let o = bin(&["sample", "--set", "c=1", "--set", "t_min=-0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_min"));

    let o = bin(&["disconnect", "--set", "c=2", "--set", "k=0", "--set", "radii=3,2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("c = 2") && err.contains("k must") && err.contains("ascending"), "{err}");

    let o = bin(&["nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // ten successes cannot be reached with c = 1 far out
    let o = bin(&["disconnect", "--set", "c=1", "--set", "k=3", "--set", "radii=1,3,6", "--trials", "100", "--set", "min_successes=50"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missed_threshold_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["disconnect", "--set", "radii=1,2,3", "--trials", "100", "--set", "expect=5", "--set", "tolerance=0.1"];
    assert_eq!(bin(&args, dir.path()).status.code(), Some(4));
    let o = bin(&["extremal-tests"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows: Vec<ExtremalRow> = read_csv(&dir.path().join("extremal-tests.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn default_output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_loopsoup"))
        .arg("formulas")
        .env("LOOPSOUP_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("formulas.csv").exists());
}

#[test]
fn soup_csvs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["sample", "--set", "c=1"], dir.path()).status.code(), Some(0));
    assert_eq!(bin(&["clusters", "--set", "c=1"], dir.path()).status.code(), Some(0));
    let loops: Vec<LoopRow> = read_csv(&dir.path().join("sample.csv")).unwrap();
    let clusters: Vec<ClusterSummary> = read_csv(&dir.path().join("clusters.csv")).unwrap();
    assert!(!loops.is_empty());
    assert_eq!(clusters.iter().map(|c| c.size).sum::<usize>(), loops.len());
    for (name, n) in [("sample.csv", loops.len()), ("clusters.csv", clusters.len())] {
        let copy = dir.path().join(format!("copy-{name}"));
        if name == "sample.csv" {
            write_csv(&copy, &loops).unwrap();
        } else {
            write_csv(&copy, &clusters).unwrap();
        }
        assert_eq!(std::fs::read(dir.path().join(name)).unwrap(), std::fs::read(&copy).unwrap(), "{name} ({n} rows)");
    }
}

#[test]
fn campaign_rows_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![
        CampaignRow { c: 0.0, k: 2, lambda: 0.05, r: 1.0, trials: 1000, successes_or_mean: 0.1 + 0.2, stderr: 1.0 / 3.0, attrition: 0 },
        CampaignRow { c: 1.0, k: 1, lambda: 0.0, r: 2.5, trials: 7, successes_or_mean: 1e-300, stderr: 0.0, attrition: 2 },
    ];
    let p = dir.path().join("rows.csv");
    write_csv(&p, &rows).unwrap();
    let back: Vec<CampaignRow> = read_csv(&p).unwrap();
    assert_eq!(back, rows);
}
