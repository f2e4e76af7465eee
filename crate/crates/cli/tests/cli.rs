use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlc-secrecy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_owned).collect();
    (header, reader.records().map(Result::unwrap).collect())
}

#[test]
fn power_sweep_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "--experiment",
        "power_sweep",
        "--instances",
        "5",
        "--seed",
        "3",
        "--sweep",
        "12,24",
        "--solvers",
        "channel_gain,tabu_search",
        "--out",
        out,
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let (header, records) = rows(&dir.path().join("power_sweep.csv"));
    assert_eq!(
        header,
        ["experiment_id", "sweep_value", "solver", "mean", "stderr", "n", "seed"]
    );
    assert_eq!(records.len(), 4);
    let solvers: Vec<&str> = records.iter().map(|r| &r[2]).collect();
    assert_eq!(solvers, ["channel_gain", "tabu_search", "channel_gain", "tabu_search"]);
    assert!(records.iter().all(|r| &r[5] == "5" && &r[6] == "3"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("power_sweep_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["seed"], 3);
    assert_eq!(manifest["sweep"], serde_json::json!([12.0, 24.0]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "experiment = \"ue_count_sweep\"\nnum_instances = 4\nseed = 11\nsweep = [2, 3]\nsolvers = [\"random\"]\n\n[tabu]\nneighborhood = \"all_coordinates\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let (_, records) = rows(&out.join("ue_count_sweep.csv"));
    assert_eq!(records.len(), 2);
    assert!(records
        .iter()
        .all(|r| &r[2] == "random" && &r[5] == "4" && &r[6] == "12"));
}

#[test]
fn print_config_round_trips() {
    let output = run(&["--experiment", "eve_fov_sweep", "--instances", "7", "--print-config"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("experiment = \"eve_fov_sweep\""));
    assert!(text.contains("num_instances = 7"));
}

#[test]
fn layout_dump_writes_positions() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["--experiment", "layout_dump", "--out", dir.path().to_str().unwrap()]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let (header, records) = rows(&dir.path().join("layout_dump_layout.csv"));
    assert_eq!(header, ["kind", "index", "x", "y", "z", "fov_deg", "coverage_radius_m"]);
    assert_eq!(records.iter().filter(|r| &r[0] == "led").count(), 25);
    assert!(dir.path().join("layout_dump_scenario.toml").exists());
}

#[test]
fn oracle_guard_needs_force_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "--experiment",
        "power_sweep",
        "--instances",
        "1",
        "--sweep",
        "20",
        "--solvers",
        "global_search",
        "--out",
        out,
    ];
    let refused = run(&args);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("force-oracle"));

    let forced = run(&[&args[..], &["--force-oracle"]].concat());
    assert!(forced.status.success(), "{}", String::from_utf8_lossy(&forced.stderr));
}

#[test]
fn bad_input_is_rejected() {
    assert!(!run(&["--experiment", "nonsense"]).status.success());
    assert!(!run(&["--solvers", "magic"]).status.success());
    assert!(!run(&["--config", "/nonexistent/run.toml"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let zero = run(&["--instances", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(!zero.status.success());
}
