use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starnls"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args).env_remove("STARNLS_WORKERS");
    if let Some(w) = workers {
        cmd.env("STARNLS_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1e-12)
}

#[test]
fn minimal_defocusing_run_completes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("minimal_defocusing.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        ok(&run(&["run", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()], None));
    }
    for f in ["diagnostics.csv", "verdict.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }
    let v = read_json(&a.join("verdict.json"));
    assert_eq!(v["termination"]["kind"], "completed");
    assert_eq!(v["scattering"]["applicable"], true);
    assert!(v["scattering"]["cauchy_tail"].as_f64().unwrap().is_finite());
    assert!(v["conservation"]["max_mass_drift"].as_f64().unwrap() < 1e-10);
    let csv = fs::read_to_string(a.join("diagnostics.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t [time],M [mass],E_gamma [energy]"), "{header}");
    assert!(header.split(',').all(|h| h.contains('[') && h.ends_with(']')));
    let rows = csv.lines().count() - 1;
    assert_eq!(rows, 21, "t_end 4 / dt 0.02 / stride 10 plus the initial row");
}

#[test]
fn pw_minus_run_matches_frozen_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("pw_minus_virial.toml");
    let out = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    ok(&out);
    let v = read_json(&dir.path().join("verdict.json"));
    let fx = read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pw_minus_virial.json"));
    assert_eq!(v["dichotomy"]["side"], fx["side"]);
    assert!(close(v["dichotomy"]["k2_margin"].as_f64().unwrap(), fx["k2_margin"].as_f64().unwrap()));
    assert_eq!(v["termination"]["kind"], fx["termination"]);
    assert!(close(v["final_time"].as_f64().unwrap(), fx["final_time"].as_f64().unwrap()));
    for (got, want) in v["virial"].as_array().unwrap().iter().zip(fx["concavity_onset"].as_array().unwrap()) {
        assert_eq!(got["concavity_onset"].as_f64(), want.as_f64());
    }
    assert!(close(v["virial"][0]["h1_growth"].as_f64().unwrap(), fx["h1_growth"].as_f64().unwrap()));
    let svg = fs::read_to_string(dir.path().join("plots.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("R=25"));
    let snap = starnls::read_snapshot(std::io::BufReader::new(fs::File::open(dir.path().join("final.txt")).unwrap())).unwrap();
    assert_eq!(snap.n_edges(), 3);
}

#[test]
fn missing_p_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("minimal_defocusing.toml")).unwrap().replace("p = 7.0\n", "");
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, text).unwrap();
    let out = run(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing field `p`") && err.contains("line"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_values_name_their_section() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("minimal_defocusing.toml")).unwrap().replace("dt = 0.02", "dt = -1.0");
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, text).unwrap();
    let out = run(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[evolve]") && err.contains("`dt`"), "{err}");
}

#[test]
fn boundary_contamination_aborts_with_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.toml");
    fs::write(
        &cfg,
        r#"
        [model]
        p = 7.0
        mu = 1
        [grid]
        length = 15.0
        h = 0.05
        [initial]
        kind = "gaussian"
        edge = 0
        amplitude = 0.2
        width = 1.0
        center = 5.0
        velocity = 4.0
        [evolve]
        dt = 0.02
        t_end = 5.0
        halt_on_contamination = true
        [outputs]
        directory = "out"
        "#,
    )
    .unwrap();
    let out = run(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contamination"));
    let v = read_json(&dir.path().join("out/verdict.json"));
    assert_eq!(v["termination"]["kind"], "boundary_contaminated");
    assert!(v["final_time"].as_f64().unwrap() < 5.0);
    assert!(dir.path().join("out/diagnostics.csv").exists());
}

fn sweep_rows(dir: &Path) -> Vec<Value> {
    read_json(&dir.join("sweep.json")).as_array().unwrap().clone()
}

#[test]
fn amplitude_sweep_flips_where_k2_crosses_its_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("amplitude_sweep.toml");
    ok(&run(&["sweep", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], Some("2")));
    let rows = sweep_rows(dir.path());
    assert_eq!(rows.len(), 8);
    let mut sides = Vec::new();
    for r in &rows {
        assert!(r["error"].is_null());
        let below = r["k2_value"].as_f64().unwrap() < r["k2_threshold"].as_f64().unwrap();
        let side = r["side"].as_str().unwrap();
        assert_eq!(side == "pw_plus", below, "row {}", r["index"]);
        sides.push(side.to_string());
    }
    let flips = sides.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "{sides:?}");
}

#[test]
fn gamma_sweep_keeps_the_threshold_and_raises_the_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("gamma_sweep.toml");
    ok(&run(&["sweep", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], Some("3")));
    let rows = sweep_rows(dir.path());
    let me: Vec<f64> = rows.iter().map(|r| r["me_threshold"].as_f64().unwrap()).collect();
    let energy: Vec<f64> = rows.iter().map(|r| r["initial_energy"].as_f64().unwrap()).collect();
    assert!(me.iter().all(|m| *m == me[0]));
    assert!(energy.windows(2).all(|w| w[1] > w[0]), "{energy:?}");
}

#[test]
fn sweep_output_is_independent_of_the_worker_budget() {
    let cfg = scenario("amplitude_sweep.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&run(&["sweep", cfg.to_str().unwrap(), "--out", a.path().to_str().unwrap()], Some("1")));
    ok(&run(&["sweep", cfg.to_str().unwrap(), "--out", b.path().to_str().unwrap()], Some("4")));
    for f in ["sweep.csv", "sweep.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let out = run(&["sweep", cfg.to_str().unwrap(), "--out", a.path().to_str().unwrap()], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("STARNLS_WORKERS"));
}

#[test]
fn empty_sweep_writes_a_header_only_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("amplitude_sweep.toml"))
        .unwrap()
        .replace("scales = [0.8, 0.9, 0.95, 0.99, 1.01, 1.05, 1.1, 1.2]", "scales = []");
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, text).unwrap();
    ok(&run(&["sweep", cfg.to_str().unwrap()], None));
    let csv = fs::read_to_string(dir.path().join("out/amplitude_sweep/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(sweep_rows(&dir.path().join("out/amplitude_sweep")).is_empty());
}

#[test]
fn failing_cells_are_recorded_and_the_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("gamma_sweep.toml"))
        .unwrap()
        .replace("gammas = [0.0, 1.0, 2.0, 5.0]", "gammas = [0.0, -1.0, 2.0]");
    let cfg = dir.path().join("partial.toml");
    fs::write(&cfg, text).unwrap();
    let out = run(&["sweep", cfg.to_str().unwrap()], None);
    ok(&out);
    let rows = sweep_rows(&dir.path().join("out/gamma_sweep"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["error"].is_null() && rows[2]["error"].is_null());
    assert!(rows[1]["error"].as_str().unwrap().contains("gamma"));
    let csv = fs::read_to_string(dir.path().join("out/gamma_sweep/sweep.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().contains("error:"));
}

#[test]
fn thresholds_verb_prints_the_table() {
    let out = run(&["thresholds", "--p", "7", "--omega", "1", "--gamma", "2"], None);
    ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["gamma"], 2.0);
    let m = v["m_line_q"].as_f64().unwrap();
    let e = v["e_line_q"].as_f64().unwrap();
    assert!((m / e - 10.0).abs() < 1e-6);
    let bad = run(&["thresholds", "--p", "4"], None);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("p > 5"));
}

#[test]
fn gn_estimate_is_seed_deterministic() {
    let args = [
        "gn-estimate", "--p", "7", "--gamma", "1", "--budget", "10", "--restarts", "2", "--seed", "3", "--length", "20",
        "--h", "0.1",
    ];
    let (a, b) = (run(&args, None), run(&args, None));
    ok(&a);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0 && v["seed"] == 3);
}

#[test]
fn check_verb_passes() {
    let out = run(&["check"], None);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 8, "{text}");
}
