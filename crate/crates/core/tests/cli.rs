use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xyness::cli::output::COLUMNS;
use xyness::cli::RunConfig;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xyness-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn xyness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyness")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// CSV records with the wall-clock column removed.
fn records_without_time(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    let skip = headers.iter().position(|h| h == "wall_time_s").unwrap();
    r.records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

const TRIVIAL: &str = "g = 0.3\ndelta = 0.0\nkappa = 0.5\nn_sites = 10\nobservables = [\"sz\", \"xx\"]\n";

#[test]
fn trivial_run_writes_table_and_config() {
    let dir = scratch("trivial");
    let cfg = write(&dir, "run.toml", TRIVIAL);
    let out_path = dir.join("t.csv").display().to_string();
    let out = xyness(&["steady", "--config", &cfg, "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), COLUMNS.to_vec());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][7], "sz");
    assert!((rows[0][8].parse::<f64>().unwrap() + 1.0).abs() < 1e-8);
    assert_eq!(&rows[1][7], "xx");
    assert!(rows[1][8].parse::<f64>().unwrap().abs() < 1e-8);
    assert_eq!(&rows[0][9], "true");

    let sidecar = std::fs::read_to_string(format!("{out_path}.config.toml")).unwrap();
    let resolved = RunConfig::from_toml(&sidecar).unwrap();
    let mut expected = RunConfig::from_toml(TRIVIAL).unwrap();
    expected.output = Some(out_path.clone());
    assert_eq!(resolved, expected);

    // Re-running the resolved configuration reproduces the table.
    let again = xyness(&["steady", "--config", &format!("{out_path}.config.toml")]);
    assert_eq!(code(&again), 0);
    let rerun = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(records_without_time(&rerun), records_without_time(&text));
}

#[test]
fn json_output_embeds_the_configuration() {
    let dir = scratch("json");
    let cfg = write(&dir, "run.toml", TRIVIAL);
    let out = xyness(&["steady", "--config", &cfg, "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let embedded = RunConfig::from_toml(v["config"].as_str().unwrap()).unwrap();
    assert_eq!(embedded.n_sites, 10);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn unconverged_run_exits_with_three() {
    let dir = scratch("unconverged");
    let cfg = write(
        &dir,
        "run.toml",
        "g = -1.0\ndelta = 1.0\nkappa = 0.5\nn_sites = 6\ntol = 1e-12\nt_max = 0.5\ncheck_interval = 0.1\n",
    );
    let out = xyness(&["steady", "--config", &cfg]);
    assert_eq!(code(&out), 3);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",false,")), "{text}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = scratch("errors");
    let unknown = write(&dir, "unknown.toml", &format!("{TRIVIAL}colour = \"red\"\n"));
    let bad_value = write(&dir, "bad.toml", "g = 0.3\ndelta = 0.0\nkappa = -1.0\nn_sites = 10\n");
    let missing = dir.join("missing.toml").display().to_string();
    for args in [
        vec!["steady", "--config", unknown.as_str()],
        vec!["steady", "--config", bad_value.as_str()],
        vec!["steady", "--config", missing.as_str()],
        vec!["steady"],
        vec!["steady", "--preset", "fig99"],
        vec!["steady", "--preset", "fig2", "--config", unknown.as_str()],
        vec!["sweep", "--config", unknown.as_str(), "--workers", "0"],
        vec!["steady", "--config", unknown.as_str(), "--format", "xml"],
        vec!["validate", "bogus"],
        vec!["frobnicate"],
    ] {
        let out = xyness(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn numerical_failure_exits_with_four() {
    let dir = scratch("numerical");
    // The spin-wave expansion has no steady state at Δ = 1.
    let cfg = write(&dir, "sw.toml", "g = -1.0\ndelta = 1.0\nkappa = 0.5\nn_sites = 2\n");
    assert_eq!(code(&xyness(&["spinwave", "--config", &cfg])), 4);
}

const SWEEP: &str = "g = 0.0\ndelta = 0.6\nkappa = 0.8\nn_sites = 6\nchi_max = 16\ntol = 1e-4\nt_max = 30.0\n\
initial = \"random_product\"\nseed = 7\nobservables = [\"sz\", \"xx\", \"negativity\"]\n\
axes = [{ name = \"g\", start = -1.0, stop = 1.0, count = 5 }]\n";

#[test]
fn sweeps_are_deterministic_and_independent_of_workers() {
    let dir = scratch("sweep");
    let cfg = write(&dir, "sweep.toml", SWEEP);
    let run = |workers: &str| {
        let out = xyness(&["sweep", "--config", &cfg, "--workers", workers]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let one = run("1");
    let again = run("1");
    let three = run("3");
    let rows = records_without_time(&one);
    // Five grid points, three observables, one centre pair or site each.
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.last().unwrap() == "ok"));
    assert_eq!(rows, records_without_time(&again));
    assert_eq!(rows, records_without_time(&three));
    let gs: Vec<&str> = rows.iter().step_by(3).map(|r| r[0].as_str()).collect();
    assert_eq!(gs, ["-1", "-0.5", "0", "0.5", "1"]);
}

#[test]
fn meanfield_and_spinwave_tables() {
    let dir = scratch("tables");
    let mf = write(
        &dir,
        "mf.toml",
        "g = 0.0\ndelta = 1.0\nkappa = 0.5\nn_sites = 2\naxes = [{ name = \"g\", values = [-1.0, 1.0, 3.0] }]\n",
    );
    let out = xyness(&["meanfield", "--config", &mf]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let labels: Vec<String> = csv::Reader::from_reader(text.as_bytes())
        .deserialize::<std::collections::HashMap<String, String>>()
        .map(|r| r.unwrap()["label"].clone())
        .collect();
    assert_eq!(labels, ["FM", "AFM", "Trivial"]);

    let sw = write(&dir, "sw.toml", "g = -1.0\ndelta = 0.01\nkappa = 0.5\nn_sites = 2\nl_max = 4\n");
    let out = xyness(&["spinwave", "--config", &sw]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}

#[test]
fn validate_and_presets() {
    let out = xyness(&["validate", "meanfield"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 2 && text.lines().all(|l| l.starts_with("PASS")), "{text}");

    let out = xyness(&["presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
