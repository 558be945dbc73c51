use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tugemm::dump::{write_dump, Tensor};
use tugemm::format::{parse_problem, to_text};
use tugemm::random_problem;
use tugemm::BitWidth;

const RUNNING_EXAMPLE: &str = "2 2 2 4\n3 -2\n1 0\n2 1\n-1 2\n0 0\n0 0\n";

fn tugemm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tugemm"))
        .args(args)
        .env_remove("TUGEMM_SEED")
        .output()
        .expect("spawn tugemm")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn simulate_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", RUNNING_EXAMPLE);
    let report = stdout_json(&tugemm(&["simulate", "--variant", "both", "--input", &input]));
    assert_eq!(report["schema_version"], 1);
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for (r, (variant, cycles)) in results.iter().zip([("serial", 10), ("parallel", 6)]) {
        assert_eq!(r["variant"], variant);
        assert_eq!(r["cycles"], cycles);
        assert_eq!(r["y"], serde_json::json!([[8, -1], [2, 1]]));
        assert_eq!(r["activity"]["output_cell_updates"], 18);
    }
    assert_eq!(results[0]["latency_breakdown"]["per_step"], serde_json::json!([6, 4]));
}

#[test]
fn simulate_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", RUNNING_EXAMPLE);
    let traces = dir.path().join("traces");
    let out = tugemm(&["simulate", "--input", &input, "--trace", traces.to_str().unwrap()]);
    assert!(out.status.success());
    let serial = fs::read_to_string(traces.join("serial_trace.csv")).unwrap();
    let parallel = fs::read_to_string(traces.join("parallel_trace.csv")).unwrap();
    assert_eq!(serial.lines().count(), 11);
    assert_eq!(parallel.lines().count(), 7);
    assert!(serial.starts_with("cycle,step_index,col_counters,row_counters"));
}

#[test]
fn seed_fallback_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tugemm"));
        cmd.args(args).env_remove("TUGEMM_SEED");
        if let Some(v) = env {
            cmd.env("TUGEMM_SEED", v);
        }
        cmd.output().unwrap()
    };
    let flag = run(None, &["simulate", "--seed", "7", "--m", "3", "--n", "3", "--p", "3"]);
    let env = run(Some("7"), &["simulate", "--m", "3", "--n", "3", "--p", "3"]);
    assert!(flag.status.success() && env.status.success());
    assert_eq!(flag.stdout, env.stdout);
    let missing = run(None, &["simulate"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = run(Some("seven"), &["simulate"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.txt", "2 2 2 4\n3 -2\n1 x\n2 1\n-1 2\n0 0\n0 0\n");
    let out = tugemm(&["simulate", "--input", &input]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn out_of_range_and_overflow_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "range.txt", "1 1 1 4\n8\n1\n0\n");
    assert_eq!(tugemm(&["simulate", "--input", &input]).status.code(), Some(4));
    let input = write(dir.path(), "ovf.txt", "1 1 1 4\n-8\n-8\n0\n");
    let out = tugemm(&["simulate", "--input", &input, "--output-bits", "6"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle"));
}

#[test]
fn latency_tables() {
    let out = tugemm(&["latency", "--n", "16", "--w", "8"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("serial    262144"), "{table}");
    assert!(table.contains("parallel  16384"), "{table}");
    let j = stdout_json(&tugemm(&["latency", "--n", "16", "--w", "2", "--json"]));
    assert_eq!(j["serial"], 64);
    assert_eq!(j["parallel"], 4);

    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", RUNNING_EXAMPLE);
    let j = stdout_json(&tugemm(&["latency", "--input", &input, "--json"]));
    assert_eq!(j["breakdown"]["per_step"], serde_json::json!([6, 4]));
    assert_eq!(j["breakdown"]["serial_total"], 10);
}

#[test]
fn profile_mixed_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = random_problem(4, 6, 5, BitWidth::W8, 17).unwrap();
    let text = write(dir.path(), "p.txt", &to_text(&p));
    let a = dir.path().join("a.tugw");
    let b = dir.path().join("b.tugw");
    write_dump(&a, &Tensor::new(vec![4, 6], p.a.data().to_vec()), 8).unwrap();
    write_dump(&b, &Tensor::new(vec![6, 5], p.b.data().to_vec()), 16).unwrap();
    let extra = dir.path().join("zero.tugw");
    write_dump(&extra, &Tensor::new(vec![3], vec![0, 0, 0]), 32).unwrap();
    let (a, b, extra) = (a.to_str().unwrap(), b.to_str().unwrap(), extra.to_str().unwrap());

    let csv_text = dir.path().join("text.csv");
    let csv_dump = dir.path().join("dump.csv");
    let mixed = stdout_json(&tugemm(&["profile", &text, extra, "--csv", csv_text.to_str().unwrap()]));
    let dumps = stdout_json(&tugemm(&["profile", a, b, extra, "--csv", csv_dump.to_str().unwrap()]));
    assert_eq!(mixed["n_operations"], 3);
    assert_eq!(mixed["mean_max"], dumps["mean_max"]);
    assert_eq!(mixed["summaries"], dumps["summaries"]);
    let (t, d) = (
        fs::read_to_string(csv_text).unwrap(),
        fs::read_to_string(csv_dump).unwrap(),
    );
    assert_eq!(t, d);
    assert!(t.starts_with("value,count,percent,cumulative_percent\n0,1,"));

    let zero = stdout_json(&tugemm(&[
        "profile",
        extra,
        "--csv",
        dir.path().join("z.csv").to_str().unwrap(),
    ]));
    assert_eq!(zero["mean_max"], 0.0);
}

#[test]
fn verify_clean_and_faulty() {
    let dir = tempfile::tempdir().unwrap();
    let repro = dir.path().join("repro.txt");
    let args = [
        "verify",
        "--trials",
        "1",
        "--large-trials",
        "0",
        "--seed",
        "4",
        "--reproducer",
    ];
    let mut clean: Vec<&str> = args.to_vec();
    clean.push(repro.to_str().unwrap());
    let first = tugemm(&clean);
    let second = tugemm(&clean);
    let report = stdout_json(&first);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(report["summary"]["failed"], 0);
    assert!(!repro.exists());

    let faulty = [
        "verify",
        "--trials",
        "50",
        "--large-trials",
        "0",
        "--inject-fault",
        "neg-neg-decrements",
        "--reproducer",
        repro.to_str().unwrap(),
    ];
    let out = tugemm(&faulty);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["summary"]["failed"].as_u64().unwrap() > 0);
    let reproducer = parse_problem(&fs::read_to_string(&repro).unwrap()).unwrap();
    assert_eq!((reproducer.m(), reproducer.n(), reproducer.p()), (1, 1, 1));
}

#[test]
fn generate_round_trips_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.json");
    let out = tugemm(&[
        "generate",
        "--seed",
        "9",
        "--m",
        "3",
        "--n",
        "2",
        "--p",
        "4",
        "--w",
        "8",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let p = parse_problem(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(p, random_problem(3, 2, 4, BitWidth::W8, 9).unwrap());
    let report = stdout_json(&tugemm(&[
        "simulate",
        "--input",
        path.to_str().unwrap(),
        "--variant",
        "serial",
    ]));
    assert_eq!(
        report["results"][0]["y"],
        serde_json::to_value(tugemm::gemm_exact(&p).unwrap()).unwrap()
    );
}

#[test]
fn usage_errors() {
    assert_eq!(tugemm(&["latency"]).status.code(), Some(2));
    assert_eq!(tugemm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tugemm(&["latency", "--n", "4", "--w", "1"]).status.code(), Some(4));
    assert_eq!(
        tugemm(&["simulate", "--input", "/nonexistent/p.txt"]).status.code(),
        Some(6)
    );
}
