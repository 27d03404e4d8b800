//! End-to-end runs of the `fpna` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fpna(args: &[&str], env_threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fpna"));
    cmd.args(args).env_remove("FPNA_THREADS");
    if let Some(t) = env_threads {
        cmd.env("FPNA_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

const SMALL_GNN: &str = r#"{"nodes": 20, "edges": 60, "features": 4, "hidden": 4, "runs": 4}"#;
const SMALL_BENCH: &str = r#"{"n": 4096, "sums_per_trial": 1, "trials": 1}"#;

#[test]
fn successful_run_exits_zero_and_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let s = spec(dir.path(), "gnn.json", SMALL_GNN);
    let out = dir.path().join("out");
    let o = fpna(&["gnn", "--spec", &s, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS deterministic_forward_v_c_zero"));
    let report = read_json(&out.join("gnn_demo.json"));
    assert_eq!(report["schema"], "fpna-report/1");
    assert_eq!(report["kind"], "gnn_demo");
    assert_eq!(report["spec"]["nodes"], 20);
    assert!(out.join("gnn_demo-combinations.csv").exists());
    assert!(out.join("gnn_demo-runs.csv").exists());
}

#[test]
fn failed_check_exits_one() {
    // Seed 2024 gives a non-monotone median sequence for these sizes.
    let dir = TempDir::new().unwrap();
    let s = spec(dir.path(), "p.json", "{}");
    let out = dir.path().join("out");
    let o = fpna(&["permute-demo", "--spec", &s, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL median_abs_v_s_non_decreasing"));
    assert!(out.join("permute_demo.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let bad_json = spec(dir.path(), "bad.json", "{ nope");
    let unknown = spec(dir.path(), "unknown.json", r#"{"bogus": 1}"#);
    let wrong_kind = spec(dir.path(), "kind.json", r#"{"kind": "pdf"}"#);
    let wrong_schema = spec(dir.path(), "schema.json", r#"{"schema": "fpna-spec/9"}"#);
    let not_object = spec(dir.path(), "array.json", "[1, 2]");
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["gnn"],
        vec!["gnn", "--spec", missing.to_str().unwrap()],
        vec!["gnn", "--spec", &bad_json],
        vec!["gnn", "--spec", &unknown],
        vec!["gnn", "--spec", &wrong_kind],
        vec!["gnn", "--spec", &wrong_schema],
        vec!["gnn", "--spec", &not_object],
        vec!["gnn", "--spec", &unknown, "--threads", "many"],
    ];
    for args in cases {
        let o = fpna(&args, None);
        assert_eq!(o.status.code(), Some(2), "args {args:?}");
    }
    let o = fpna(&["gnn", "--spec", &unknown], Some("lots"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(fpna(&["--help"], None).status.code(), Some(0));
    assert_eq!(fpna(&["--version"], None).status.code(), Some(0));
    let o = fpna(&["ops", "--help"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--threads"));
}

#[test]
fn envelope_fields_are_accepted() {
    let dir = TempDir::new().unwrap();
    let s = spec(
        dir.path(),
        "g.json",
        r#"{"schema": "fpna-spec/1", "kind": "gnn_demo", "nodes": 10, "edges": 20, "runs": 2}"#,
    );
    let out = dir.path().join("out");
    let o = fpna(&["gnn", "--spec", &s, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(read_json(&out.join("gnn_demo.json"))["spec"].get("kind").is_none());
}

#[test]
fn outputs_are_byte_stable_across_runs_and_pool_sizes() {
    let dir = TempDir::new().unwrap();
    let specs = [
        ("gnn", "gnn_demo", SMALL_GNN),
        ("pdf", "pdf", r#"{"n": 3000, "arrays": 3, "samples_per_array": 20}"#),
        ("ops", "op_sweep", r#"{"dims": [50], "ratios": [0.5, 1.0], "runs": 3}"#),
    ];
    for (cmd, stem, body) in specs {
        let s = spec(dir.path(), &format!("{cmd}.json"), body);
        let mut files = Vec::new();
        for (i, threads) in ["1", "3", "3"].iter().enumerate() {
            let out = dir.path().join(format!("{cmd}-{i}"));
            let o = fpna(&[cmd, "--spec", &s, "--out", out.to_str().unwrap(), "--threads", threads], None);
            assert_eq!(o.status.code(), Some(0), "{cmd}");
            let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
            names.sort();
            let contents: Vec<(std::ffi::OsString, Vec<u8>)> =
                names.into_iter().map(|n| (n.clone(), fs::read(out.join(&n)).unwrap())).collect();
            files.push(contents);
        }
        assert!(files[0].iter().any(|(n, _)| n.to_str() == Some(&format!("{stem}.json"))));
        assert_eq!(files[0], files[1], "{cmd} differs between 1 and 3 workers");
        assert_eq!(files[1], files[2], "{cmd} differs between repeated runs");
    }
}

#[test]
fn thread_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let s = spec(dir.path(), "b.json", SMALL_BENCH);
    let workers = |args: &[&str], env: Option<&str>| {
        let out = dir.path().join("bench");
        let mut all = vec!["bench", "--spec", &s, "--out", out.to_str().unwrap()];
        all.extend_from_slice(args);
        let o = fpna(&all, env);
        assert_eq!(o.status.code(), Some(0));
        read_json(&out.join("bench.json"))["summary"]["workers"].as_u64().unwrap()
    };
    assert_eq!(workers(&[], Some("3")), 3);
    assert_eq!(workers(&["--threads", "2"], Some("3")), 2);
    assert_eq!(workers(&["--threads", "1"], None), 1);
}

#[test]
fn seed_flag_overrides_spec_seed() {
    let dir = TempDir::new().unwrap();
    let s = spec(dir.path(), "g.json", r#"{"nodes": 10, "edges": 20, "runs": 2, "seed": 5}"#);
    let run = |extra: &[&str]| {
        let out = dir.path().join("out");
        let mut args = vec!["gnn", "--spec", &s, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(fpna(&args, None).status.code(), Some(0));
        read_json(&out.join("gnn_demo.json"))
    };
    assert_eq!(run(&[])["spec"]["seed"], 5);
    let overridden = run(&["--seed", "77"]);
    assert_eq!(overridden["spec"]["seed"], 77);
}

#[test]
fn csv_tables_round_trip_against_json() {
    let dir = TempDir::new().unwrap();
    let s = spec(dir.path(), "pdf.json", r#"{"n": 2000, "arrays": 2, "samples_per_array": 10}"#);
    let out = dir.path().join("out");
    assert_eq!(fpna(&["pdf", "--spec", &s, "--out", out.to_str().unwrap()], None).status.code(), Some(0));
    let report = read_json(&out.join("pdf.json"));
    let table = report["tables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["name"] == "samples")
        .unwrap();
    let mut reader = csv::Reader::from_path(out.join("pdf-samples.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["array", "data_seed", "sample", "schedule_seed", "s_d", "s_nd", "v_s"]
    );
    let rows = table["rows"].as_array().unwrap();
    let mut count = 0;
    for (record, json_row) in reader.records().zip(rows) {
        let record = record.unwrap();
        count += 1;
        for (field, cell) in record.iter().zip(json_row.as_array().unwrap()) {
            match cell {
                Value::Number(n) if n.is_u64() => assert_eq!(field.parse::<u64>().unwrap(), n.as_u64().unwrap()),
                Value::Number(n) => assert_eq!(field.parse::<f64>().unwrap().to_bits(), n.as_f64().unwrap().to_bits()),
                other => panic!("unexpected cell {other}"),
            }
        }
    }
    assert_eq!(count, 20);
}
