use std::path::{Path, PathBuf};

use super::sweep::CSV_HEADER;
use super::{EXIT_ANCHOR_FAILURE, EXIT_CONFIG, EXIT_OK};
use crate::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(
        std::iter::once("risplace").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const TWO_STEP: &str = r#"
mode = "EXACT"
[rx]
diameter_m = 0.03
[ris]
area_m2 = 0.012
[geometry]
r_h = 30.0
y_s = 5.0
[sweep]
variable = "r_1h"
from = 2.0
to = 28.0
steps = 2
"#;

#[test]
fn validate_reports_every_anchor() {
    let (code, out, _) = run(&["validate"]);
    let lines: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(lines.len(), 16);
    let failed = lines.iter().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(
        code,
        if failed == 0 {
            EXIT_OK
        } else {
            EXIT_ANCHOR_FAILURE
        }
    );
    for name in [
        "fnbw_3.94_deg",
        "max_gain_tx_15cm_dbi",
        "noise_power_dbm",
        "large_ris_optimum_m",
    ] {
        assert!(
            lines
                .iter()
                .any(|l| l.starts_with("PASS") && l.contains(name)),
            "{name}"
        );
    }
}

#[test]
fn validate_json_is_machine_readable() {
    let (_, out, _) = run(&["validate", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let anchors = v["anchors"].as_array().unwrap();
    assert_eq!(anchors.len(), 16);
    let failed = anchors.iter().filter(|a| a["passed"] == false).count();
    assert_eq!(v["failed"], failed);
}

#[test]
fn perturbed_null_factor_trips_beamwidth_anchors() {
    let (code, out, _) = run(&["validate", "--fnbw-factor", "1.25"]);
    assert_eq!(code, EXIT_ANCHOR_FAILURE);
    for name in ["fnbw_3.94_deg", "fnbw_tx_15cm_deg"] {
        assert!(
            out.lines()
                .any(|l| l.starts_with("FAIL") && l.contains(name)),
            "{name}"
        );
    }
}

#[test]
fn bad_invocations_exit_with_config_code() {
    assert_eq!(
        run(&["sweep", "--config", "/nonexistent/scenario.toml"]).0,
        EXIT_CONFIG
    );
    assert_eq!(run(&["sweep"]).0, EXIT_CONFIG);
    assert_eq!(run(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(
        run(&["sweep", "--config", "x.toml", "--format", "xml"]).0,
        EXIT_CONFIG
    );
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[geometry]\nr_h = -3.0\n[sweep]\nvariable = \"r_1h\"\nfrom = 0.0\nto = 1.0\nsteps = 2\n", "r_h"),
        ("[ris]\ngamma = 1.5\n", "gamma"),
        ("[geometry]\nwidth = 3.0\n", "width"),
        ("mode = \"FAST\"\n", "mode"),
    ];
    for (body, field) in cases {
        let path = write_config(dir.path(), body);
        let (code, _, err) = run(&["sweep", "--config", &path]);
        assert_eq!(code, EXIT_CONFIG, "{body}");
        assert!(err.contains(field), "{field}: {err}");
    }
}

#[test]
fn sweep_requires_sweep_section() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "mode = \"SMALL\"\n");
    let (code, _, err) = run(&["sweep", "--config", &path]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("sweep"));
}

#[test]
fn two_step_sweep_hits_both_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TWO_STEP);
    let (code, out, _) = run(&["sweep", "--config", &path]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    let values: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![2.0, 28.0]);
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells.len(), 14);
        assert!(cells.iter().all(|c| !c.is_empty()));
        assert_eq!(cells[13], "SMALL_RIS");
    }
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TWO_STEP);
    let (_, csv, _) = run(&["sweep", "--config", &path]);
    let (_, json, _) = run(&["sweep", "--config", &path, "--format", "json"]);
    let records: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    for (line, rec) in csv.lines().skip(1).zip(&records) {
        let cells: Vec<&str> = line.split(',').collect();
        for (k, key) in CSV_HEADER.split(',').enumerate().skip(1) {
            match rec[key].as_f64() {
                Some(x) => {
                    let y: f64 = cells[k].parse().unwrap();
                    assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0), "{key}");
                }
                None => assert_eq!(rec[key].as_str().unwrap_or(""), cells[k], "{key}"),
            }
        }
    }
}

#[test]
fn out_and_plot_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TWO_STEP);
    let out = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let (code, stdout, _) = run(&[
        "sweep",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
        "--diagnostics",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 19);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn failed_points_leave_empty_cells() {
    let dir = tempfile::tempdir().unwrap();
    // far along the wall the first-null cone grazes the RIS plane
    let body = TWO_STEP
        .replace("mode = \"EXACT\"", "mode = \"SMALL\"")
        .replace("to = 28.0", "to = 4000.0");
    let path = write_config(dir.path(), &body);
    let (code, out, err) = run(&["sweep", "--config", &path]);
    assert_eq!(code, EXIT_OK);
    let last: Vec<&str> = out.lines().last().unwrap().split(',').collect();
    assert_eq!(last[1].parse::<f64>().unwrap(), 4000.0);
    assert!(last[2..].iter().all(|c| c.is_empty()), "{last:?}");
    assert!(err.contains("warning"));
}

#[test]
fn optimize_reports_each_wall_distance() {
    let (code, out, _) = run(&[
        "optimize",
        "--config",
        &example("small_ris_wall_distance.toml"),
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 15);
    for p in points {
        let a = &p["analytic"];
        assert_eq!(a["regime"], "SMALL_RIS");
        let r = a["r_1h"].as_f64().unwrap();
        assert!((0.0..=80.0).contains(&r));
    }
}

#[test]
fn optimize_with_small_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let body = "mode = \"SMALL\"\n[rx]\ndiameter_m = 0.03\n[geometry]\nr_h = 80.0\ny_s = 5.0\n\
                [placement]\ndomain = [0.0, 80.0]\noracle_mode = \"SMALL\"\n";
    let path = write_config(dir.path(), body);
    let (code, out, _) = run(&["optimize", "--config", &path, "--oracle"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let gap = v["points"][0]["gap_fraction"].as_f64().unwrap();
    assert!(gap < 1e-4, "{gap}");
}

#[test]
fn example_configs_resolve() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            cli::ScenarioConfig::load(&path).unwrap().resolve().unwrap();
            n += 1;
        }
    }
    assert!(n >= 5);
}
