use std::process::{Command, Output};

use serde_json::Value;

fn nxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nxlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn passing_suite_exits_zero_with_a_json_report() {
    let out = nxlab(&["verify", "--suite", "closing"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["suite"], "closing");
    assert_eq!(r["total"], 27);
    assert_eq!(r["pass"], 27);
    assert!(r.get("wall_clock_ms").is_none());
}

#[test]
fn timing_flag_adds_wall_clock() {
    let r = json(&nxlab(&["verify", "--suite", "closing", "--timing"]));
    assert!(r["wall_clock_ms"].as_f64().is_some());
}

#[test]
fn nonpositive_tolerance_fails_with_exit_one() {
    let out = nxlab(&["verify", "--suite", "flat", "--trials", "3", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "--suite", "nonesuch"][..],
        &["verify", "--suite", "flat", "--trials", "0"],
        &["dual", "--grid", "0"],
        &["dual", "--gauge", "pow:1"],
        &["porosity", "--set", "bogus", "--q", "0"],
        &["gauge", "--gauge", "nonsense"],
        &["frobnicate"],
    ] {
        assert_eq!(nxlab(args).status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn unwritable_output_exits_three() {
    let out = nxlab(&["verify", "--suite", "closing", "--out", "/nonexistent/dir/r.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_has_a_header_and_one_row_per_case() {
    let out = nxlab(&["verify", "--suite", "flat", "--trials", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "suite");
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn toml_config_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "suite = \"flat\"\ntrials = 3\nseed = 5\n").unwrap();
    let p = path.to_str().unwrap();
    let r = json(&nxlab(&["verify", "--config", p]));
    assert_eq!(r["suite"], "flat");
    assert_eq!(r["total"], 3);
    let r = json(&nxlab(&["verify", "--config", p, "--trials", "2"]));
    assert_eq!(r["total"], 2);
    assert_eq!(r["config"]["seed"], 5);

    std::fs::write(&path, "suite = \"flat\"\ntrails = 3\n").unwrap();
    assert_eq!(nxlab(&["verify", "--config", p]).status.code(), Some(2));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = nxlab(&["verify", "--suite", "gauge", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let printed = json(&nxlab(&["verify", "--suite", "gauge"]));
    assert_eq!(written["cases"], printed["cases"]);
}

#[test]
fn porosity_of_reciprocals() {
    // gaps near 0 shrink like 1/n², so no linear hole survives there
    let at_zero = json(&nxlab(&["porosity", "--set", "reciprocals", "--q", "0", "--body", "box:-1:1", "--levels", "10"]));
    assert_eq!(at_zero["upper"]["verdict"], "not-detected");
    assert_eq!(at_zero["lower"]["verdict"], "not-detected");

    let out = nxlab(&["porosity", "--set", "reciprocals", "--q", "0.5", "--body", "box:-1:1", "--eps0", "0.25", "--levels", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lower"]["verdict"], "porous-at-point");
    assert!(v["lower"]["constant"].as_f64().unwrap() >= 0.25);
    assert_eq!(v["lower"]["witnesses"].as_array().unwrap().len(), 10);
    assert_eq!(v["upper"]["verdict"], "porous-at-point");
}

#[test]
fn porosity_of_a_finite_set_given_as_json() {
    let out = nxlab(&["porosity", "--set", "[[0.0,0.0],[0.5,0.5]]", "--q", "0,0", "--body", "box", "--levels", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["upper"]["verdict"], "porous-at-point");
}

#[test]
fn gauge_table_for_sqrt() {
    let out = nxlab(&["gauge", "--gauge", "sqrt", "--points", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["kind", "index", "t", "phi", "xi", "ratio"]);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    let grid = rows.iter().filter(|r| &r[0] == "grid").count();
    let rungs: Vec<f64> = rows.iter().filter(|r| &r[0] == "rung").map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(grid, 10);
    assert!(!rungs.is_empty());
    // √t rungs: s_{j+1} = s_j / 2
    for w in rungs.windows(2) {
        assert!((w[1] - w[0] / 2.0).abs() <= 1e-12 * w[0]);
    }
}
