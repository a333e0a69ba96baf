//! End-to-end runs of the `downlink` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use downlink::budget::{self, ChannelParams};
use downlink::geometry::LinkGeometry;
use downlink::output::format_sig9;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("scenario.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_downlink"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn pass_time_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "scenario = \"pass_time\"\n[geometry]\naltitudes = [\"500 km\"]\n",
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("out/pass_time.csv"));
    assert_eq!(
        header,
        ["altitude_m", "zenith_limit_deg", "total_s", "effective_s"]
    );
    let total: f64 = rows[0][2].parse().unwrap();
    let eff: f64 = rows[0][3].parse().unwrap();
    assert!((total - 700.0).abs() <= 70.0, "{total}");
    assert!((eff - 450.0).abs() <= 45.0, "{eff}");
}

#[test]
fn link_budget_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = \"link_budget\"\n[geometry]\naltitudes = [\"420 km\"]\n[channel]\nmode = \"deterministic\"\n[sweep]\nzenith_limit_deg = 0\n";
    let out = run(dir.path(), text, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("out/loss_420km.csv"));
    assert_eq!(
        header,
        [
            "zenith_deg",
            "diameter_m",
            "mean_loss_db",
            "sd_loss_db",
            "p05_db",
            "p50_db",
            "p95_db"
        ]
    );
    assert_eq!(rows.len(), 4);
    let geom = LinkGeometry::new(420e3, 65.0, 0.0).unwrap();
    for (row, d) in rows.iter().zip([0.25, 0.5, 0.75, 1.0]) {
        let b = budget::compose(&ChannelParams::default().with_diameter(d), &geom, 1.0).unwrap();
        assert_eq!(row[2], format_sig9(b.loss_db));
        assert_eq!(row[3], "0");
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let text = "scenario = \"link_budget\"\nseed = 4\n[geometry]\naltitudes = [\"420 km\"]\n[channel]\ndiameters = [\"50 cm\"]\n[sweep]\nzenith_step_deg = 20\ndraws_per_point = 500\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(a.path(), text, &[]).status.success());
    assert!(run(b.path(), text, &[]).status.success());
    let fa = fs::read(a.path().join("out/loss_420km.csv")).unwrap();
    let fb = fs::read(b.path().join("out/loss_420km.csv")).unwrap();
    assert_eq!(fa, fb);
    let c = tempfile::tempdir().unwrap();
    assert!(run(c.path(), text, &["--seed", "5"]).status.success());
    assert_ne!(fa, fs::read(c.path().join("out/loss_420km.csv")).unwrap());
}

#[test]
fn qst_scenario_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[geometry]\naltitudes = [\"420 km\"]\n[channel]\ndiameters = [\"1 m\"]\n[tomography]\nphotons = [200000]\nensemble_size = 6\nzenith_step_deg = 40\n";
    let out = run(dir.path(), text, &["--scenario", "qst", "--seed", "11"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("out/fidelity_420km.csv"));
    assert_eq!(
        header,
        [
            "zenith_deg",
            "diameter_m",
            "photons",
            "mean_fidelity",
            "sd_fidelity",
            "failures"
        ]
    );
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let f: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["scenario"], "qst");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["config"]["tomography"]["ensemble_size"], 6);
}

#[test]
fn av_sweep_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "scenario = \"av_sweep\"\n[sweep]\nzenith_step_deg = 10\n",
        &[],
    );
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("out/av_420km.csv"));
    assert_eq!(header, ["zenith_deg", "diameter_m", "av_ratio"]);
    assert_eq!(rows.len(), 4 * 17);
    assert!(dir.path().join("out/av_20200km.csv").exists());
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap()
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "[pass_time]\nzenith_limit_deg = 95\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "config_invalid");

    let out = run(dir.path(), "[channel]\nwavelenght = \"1550 nm\"\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "config_parse");
    assert!(rec["message"].as_str().unwrap().contains("wavelenght"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn io_errors_exit_4() {
    let out = Command::new(env!("CARGO_BIN_EXE_downlink"))
        .args(["--config", "/nonexistent/scenario.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "io");

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_downlink"))
        .args(["--scenario", "pass_time", "--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
