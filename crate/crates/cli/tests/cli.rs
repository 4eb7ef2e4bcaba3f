use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pricedemand")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = bin(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synth_data(dir: &Path) {
    ok(&["synth", "prices", "--n", "20000", "--seed", "5", "--out", "p.csv"], dir);
    ok(&["synth", "demand", "--input", "p.csv", "--seed", "6", "--out", "d.csv"], dir);
}

#[test]
fn help_lists_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["--help"], dir.path());
    for cmd in ["ingest", "stats", "fit", "forecast", "spikeprob", "welfare", "synth", "run"] {
        assert!(text.contains(cmd), "help lacks {cmd}");
    }
    let fit = ok(&["fit", "arx", "--help"], dir.path());
    for flag in ["--lags", "--xlags", "--transform", "--quantile", "--window", "--surge-days-only", "--joint"] {
        assert!(fit.contains(flag), "fit help lacks {flag}");
    }
}

#[test]
fn missing_input_fails_at_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "--input", "absent.csv", "--output-dir", "out"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage ingest"));
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    assert!(manifest.contains("\"failed_stage\": \"ingest\""));
    let out = bin(&["stats", "moments", "--input", "absent.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest"));
}

#[test]
fn synth_fit_forecast_loop() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_data(d);
    let ingest: serde_json::Value = serde_json::from_str(&ok(&["ingest", "--input", "d.csv"], d)).unwrap();
    assert_eq!(ingest["records"], 20000);
    ok(&["fit", "arx", "--input", "d.csv", "--out", "m.json", "--report", "r.json"], d);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    let alpha1 = report["model"]["ar_coeffs"][0].as_f64().unwrap();
    assert!((alpha1 - 0.81268).abs() < 0.05, "alpha1 {alpha1}");
    assert!(report["equation"].as_str().unwrap().starts_with("G(z) = ("));
    let diag: serde_json::Value =
        serde_json::from_str(&ok(&["forecast", "--model", "m.json", "--history", "d.csv", "--out", "f.csv"], d)).unwrap();
    assert!(diag["correlation"].as_f64().unwrap() > 0.8);
    let csv = std::fs::read_to_string(d.join("f.csv")).unwrap();
    assert!(csv.starts_with("index,forecast,realized,residual"));
    let spikes = ok(&["spikeprob", "--input", "d.csv", "--range", "q95:q100", "--max-delay", "4"], d);
    assert_eq!(spikes.lines().count(), 5);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_data(d);
    std::fs::write(d.join("cfg.toml"), "input = \"d.csv\"\nseed = 3\n").unwrap();
    ok(&["run", "--config", "cfg.toml", "--output-dir", "a"], d);
    ok(&["run", "--config", "cfg.toml", "--output-dir", "b"], d);
    for entry in std::fs::read_dir(d.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let x = std::fs::read(d.join("a").join(&name)).unwrap();
        let y = std::fs::read(d.join("b").join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
    let summary = std::fs::read_to_string(d.join("a/summary.txt")).unwrap();
    assert!(summary.contains("Peak-window model: price step"));
}

#[test]
fn welfare_alternating_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = r#"[{"demand":{"intercept":100,"slope":-1},"supply":{"intercept":0,"slope":1}},
               {"demand":{"intercept":100,"slope":-1},"supply":{"intercept":-20,"slope":1}},
               {"demand":{"intercept":100,"slope":-1},"supply":{"intercept":0,"slope":1}}]"#;
    std::fs::write(d.join("s.json"), s).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["welfare", "--scenario", "s.json", "--policy", "rtrp-inertia"], d)).unwrap();
    assert_eq!(v["total"], 200.0);
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["welfare", "--scenario", "s.json", "--policy", "rtrp-instant"], d)).unwrap();
    assert_eq!(v["total"], 0.0);
}
