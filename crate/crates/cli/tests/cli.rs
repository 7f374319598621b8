use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn topodyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topodyn")).args(args).output().expect("binary runs")
}

fn crate_path(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn strip_runtimes(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtime_ms");
            map.values_mut().for_each(strip_runtimes);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_runtimes),
        _ => {}
    }
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn lists_builtin_scenarios() {
    let out = topodyn(&["--list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["linear-attractor-3d", "van-der-pol", "brockett-integrator", "klein-bottle"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn attractor_index_is_minus_one() {
    let out = topodyn(&["analyze", "linear-attractor-3d"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["aggregate"], "pass");
    let check = &report["checks"][0];
    assert_eq!(check["condition"], "closed-loop-index");
    assert_eq!(check["observed"]["index"], -1);
}

#[test]
fn brockett_integrator_is_flagged() {
    let out = topodyn(&["analyze", "brockett-integrator"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["aggregate"], "violated");
    let brockett = report["checks"].as_array().unwrap().iter().find(|c| c["condition"] == "brockett").unwrap();
    assert_eq!(brockett["verdict"], "violated");
    let cert: Vec<Vec<f64>> = serde_json::from_value(brockett["observed"]["certificate"].clone()).unwrap();
    // both poles are out of reach; so is anything tilted far enough toward them
    for pole in [1.0, -1.0] {
        assert!(cert.iter().any(|d| d[0].abs() < 1e-12 && d[1].abs() < 1e-12 && d[2] == pole), "{cert:?}");
    }
    assert!(cert.iter().all(|d| d[2].abs() > 0.25), "{cert:?}");
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = topodyn(&["analyze", &crate_path("tests/fixtures/unknown-check.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("lefschetz-number"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let out = topodyn(&["analyze", &crate_path("tests/fixtures/bad-radius.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("radius"));

    let out = topodyn(&["analyze", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("no-such-scenario"));
}

#[test]
fn reports_are_deterministic() {
    for name in ["van-der-pol", "brockett-integrator"] {
        let mut a = json(&topodyn(&["analyze", name, "--seed", "11"]));
        let mut b = json(&topodyn(&["analyze", name, "--seed", "11"]));
        strip_runtimes(&mut a);
        strip_runtimes(&mut b);
        assert_eq!(a, b, "{name}");
        assert_eq!(a["seed"], 11);
    }
}

#[test]
fn csv_has_one_row_per_quantity() {
    let out = topodyn(&["analyze", "power-2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["check", "condition", "verdict", "quantity", "value"]);
    let rows: Vec<csv::StringRecord> = rows.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().any(|r| &r[1] == "degree" && &r[3] == "observed.class" && &r[4] == "2"), "{text}");
}

#[test]
fn svg_shows_the_winding() {
    let dir = tempfile::tempdir().unwrap();
    let out = topodyn(&["analyze", "power-2", "--format", "svg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svgs: Vec<PathBuf> = files(dir.path()).into_iter().filter(|p| p.extension().is_some_and(|e| e == "svg")).collect();
    assert!(!svgs.is_empty());
    let svg = std::fs::read_to_string(&svgs[0]).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("winding 2"), "{}", svgs[0].display());
    assert!(dir.path().join("power-2.json").exists() && dir.path().join("power-2.csv").exists());
}

#[test]
fn svg_marks_hyperplane_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let out = topodyn(&["analyze", "van-der-pol", "--format", "svg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = files(dir.path())
        .into_iter()
        .find(|p| p.to_string_lossy().contains("hemisphere") && p.extension().is_some_and(|e| e == "svg"))
        .expect("hemisphere plot");
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.contains("hyperplane crossings"));
}

#[test]
fn no_plot_means_no_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = topodyn(&["analyze", "linear-attractor-1d", "--format", "svg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = files(dir.path()).iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, vec!["linear-attractor-1d.csv", "linear-attractor-1d.json"]);
}

#[test]
fn example_scenarios_run() {
    let expect = [("saddle-on-octahedron.json", 0), ("unicycle.json", 1), ("van-der-pol-strong.json", 0)];
    for (file, code) in expect {
        let out = topodyn(&["analyze", &crate_path(&format!("scenarios/{file}"))]);
        assert_eq!(out.status.code(), Some(code), "{file}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let report = json(&topodyn(&["analyze", &crate_path("scenarios/saddle-on-octahedron.json")]));
    assert_eq!(report["checks"][0]["observed"]["class"], 1);
    assert_eq!(report["checks"][1]["observed"]["betti"], serde_json::json!([1, 0, 1]));
}
