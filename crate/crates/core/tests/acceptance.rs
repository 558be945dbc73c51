//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use tugemm::cli::{cmd_simulate, cmd_verify, ProblemSource, RunConfig, VariantSel};
use tugemm::dump::write_dump;
use tugemm::problem::worst_case_problem;
use tugemm::profiler::profile_paths;
use tugemm::verify::{Check, VerifyConfig, VerifySummary};
use tugemm::{
    estimate_workload_latency, gemm_exact, parallel_run, random_problem, serial_run, BitWidth, GemmProblem, Matrix,
    OutputWidthPolicy, Variant,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn failures_of(s: &VerifySummary, checks: &[Check]) -> usize {
    checks.iter().map(|c| s.check_failures[c]).sum()
}

fn exactness(s: &VerifySummary, secs: f64) -> Outcome {
    let mismatches = failures_of(s, &[Check::SerialExact, Check::ParallelExact, Check::Simulation]);
    outcome(
        s.trials >= 10_100 && mismatches == 0,
        format!("{} trials, {mismatches} output mismatches, {secs:.1}s", s.trials),
    )
}

fn worst_case() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (n, bits) in [(4usize, 2u32), (8, 4), (16, 8)] {
        let w = BitWidth::new(bits).unwrap();
        let p = worst_case_problem(n, n, n, w);
        let s = serial_run(&p, OutputWidthPolicy::Unbounded).unwrap().cycles;
        let q = parallel_run(&p, OutputWidthPolicy::Unbounded).unwrap().cycles;
        let mag = w.max_magnitude();
        let ok = s == n as u64 * mag * mag && q == mag * mag && s == n as u64 * q;
        pass &= ok;
        notes.push(format!("N={n} w={bits}: serial {s}, parallel {q}, ratio {}", s / q));
    }
    outcome(pass, notes.join("; "))
}

fn analytic_agreement(s: &VerifySummary) -> Outcome {
    let bad = failures_of(s, &[Check::SerialLatency, Check::ParallelLatency]);
    outcome(
        bad == 0,
        format!("{bad} latency disagreements over {} trials", s.trials),
    )
}

fn transition_bound(s: &VerifySummary) -> Outcome {
    let bad = failures_of(s, &[Check::SerialTransitions, Check::ParallelTransitions]);
    outcome(
        bad == 0,
        format!("{bad} lines over 2 edges/load across {} trials", s.trials),
    )
}

fn activity(s: &VerifySummary) -> Outcome {
    let bad = failures_of(
        s,
        &[Check::SerialActivity, Check::ParallelActivity, Check::ActivityAgreement],
    );
    outcome(
        bad == 0,
        format!("{bad} conservation violations over {} trials", s.trials),
    )
}

/// 100 operations: 8 with max 0, 42 with max 20, 40 with max 60, 10 with
/// max 86. Mean is exactly 41; 50% fall below 50 and 90% below 80.
fn average_case_maxima() -> Vec<u64> {
    let mut v = vec![0u64; 8];
    v.extend([20; 42]);
    v.extend([60; 40]);
    v.extend([86; 10]);
    v
}

fn average_case(dir: &std::path::Path) -> Outcome {
    let w = BitWidth::W8;
    let maxima = average_case_maxima();
    let corpus = tugemm::profiler::synthetic_corpus(&maxima, 64, w, 41);
    let paths: Vec<PathBuf> = corpus
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.join(format!("op{i:03}.tugw"));
            write_dump(&path, t, 8).unwrap();
            path
        })
        .collect();
    let stats = profile_paths(&paths, w).unwrap();
    let summary = estimate_workload_latency(&stats, 16, Variant::Serial);
    let cdf = stats.cdf();
    let ratio = summary.worst_case_ratio;
    let pass = stats.mean_max() == 41.0 && (9.5..=10.0).contains(&ratio) && cdf[0] == 8.0;
    outcome(
        pass,
        format!(
            "mean max {}, worst-case ratio {ratio:.4}, cdf(0) = {}%, cdf(49) = {}%, cdf(79) = {}%",
            stats.mean_max(),
            cdf[0],
            cdf[49],
            cdf[79]
        ),
    )
}

fn zeroed(m: &Matrix) -> Matrix {
    Matrix::zeros(m.rows(), m.cols())
}

fn degenerate() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let base = random_problem(5, 16, 3, BitWidth::W4, 2024).unwrap();
    let cases = [
        ("A=0", zeroed(&base.a), base.b.clone()),
        ("B=0", base.a.clone(), zeroed(&base.b)),
        ("A=B=0", zeroed(&base.a), zeroed(&base.b)),
    ];
    for (label, a, b) in cases {
        let p = GemmProblem::new(a, b, base.c.clone(), base.width).unwrap();
        let s = serial_run(&p, OutputWidthPolicy::Unbounded).unwrap();
        let q = parallel_run(&p, OutputWidthPolicy::Unbounded).unwrap();
        let ok = s.y == p.c && q.y == p.c && s.cycles == p.n() as u64 && q.cycles == 1;
        pass &= ok;
        notes.push(format!(
            "{label}: serial {} / parallel {} cycles (N={})",
            s.cycles,
            q.cycles,
            p.n()
        ));
    }
    let mut singles = 0;
    let mut single_bad = 0;
    for bits in tugemm::problem::MIN_WIDTH..=6 {
        let w = BitWidth::new(bits).unwrap();
        for a in w.min_value()..=w.max_value() {
            for b in w.min_value()..=w.max_value() {
                for c in [w.min_value(), 0, w.max_value()] {
                    let p = GemmProblem::new(
                        Matrix::from_rows(&[[a]]).unwrap(),
                        Matrix::from_rows(&[[b]]).unwrap(),
                        Matrix::from_rows(&[[c]]).unwrap(),
                        w,
                    )
                    .unwrap();
                    let y = gemm_exact(&p).unwrap();
                    let s = serial_run(&p, OutputWidthPolicy::Unbounded).unwrap();
                    let q = parallel_run(&p, OutputWidthPolicy::Unbounded).unwrap();
                    singles += 1;
                    if s.y != y || q.y != y || y.get(0, 0) != a * b + c {
                        single_bad += 1;
                    }
                }
            }
        }
    }
    for bits in 7..=tugemm::problem::MAX_WIDTH {
        let w = BitWidth::new(bits).unwrap();
        let (lo, hi) = (w.min_value(), w.max_value());
        let mut pairs = vec![(lo, -1), (hi, -1), (-1, lo), (1, hi), (0, lo), (lo, 0)];
        if bits <= 10 {
            pairs.extend([(lo, lo), (hi, lo)]);
        }
        for (a, b) in pairs {
            let p = GemmProblem::new(
                Matrix::from_rows(&[[a]]).unwrap(),
                Matrix::from_rows(&[[b]]).unwrap(),
                Matrix::from_rows(&[[hi]]).unwrap(),
                w,
            )
            .unwrap();
            let s = serial_run(&p, OutputWidthPolicy::Unbounded).unwrap();
            let q = parallel_run(&p, OutputWidthPolicy::Unbounded).unwrap();
            singles += 1;
            if s.y.get(0, 0) != a * b + hi || q.y.get(0, 0) != a * b + hi {
                single_bad += 1;
            }
        }
    }
    pass &= single_bad == 0;
    notes.push(format!("1x1x1: {single_bad}/{singles} mismatches"));
    outcome(pass, notes.join("; "))
}

fn run_bin(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_tugemm"))
        .args(args)
        .env_remove(tugemm::cli::SEED_ENV)
        .output()
        .expect("spawn tugemm");
    assert!(
        out.status.success(),
        "tugemm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 3] = [
        &[
            "simulate", "--seed", "7", "--m", "16", "--n", "16", "--p", "16", "--w", "8",
        ],
        &["verify", "--trials", "300", "--large-trials", "2", "--seed", "11"],
        &[
            "generate", "--seed", "3", "--m", "6", "--n", "5", "--p", "4", "--w", "8", "--format", "json",
        ],
    ];
    let mut identical = 0;
    for args in commands {
        if run_bin(args) == run_bin(args) {
            identical += 1;
        }
    }
    let cfg = RunConfig {
        variant: VariantSel::Both,
        m: 16,
        n: 16,
        p: 16,
        w: 8,
        source: ProblemSource::Seed(7),
        policy: OutputWidthPolicy::Unbounded,
        trace: None,
        output: None,
    };
    let first = serde_json::to_vec(&cmd_simulate(&cfg).unwrap()).unwrap();
    let second = serde_json::to_vec(&cmd_simulate(&cfg).unwrap()).unwrap();
    let in_process = first == second;
    outcome(
        identical == commands.len() && in_process,
        format!(
            "{identical}/{} CLI reports byte-identical across runs; library report identical: {in_process}",
            commands.len()
        ),
    )
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let report = cmd_verify(&VerifyConfig::default(), None).expect("verify runs");
    let secs = start.elapsed().as_secs_f64();
    let summary = &report.summary;

    let results = [
        ("1 exactness", exactness(summary, secs)),
        ("2 worst-case latency", worst_case()),
        ("3 analytic/simulated agreement", analytic_agreement(summary)),
        ("4 transition bound", transition_bound(summary)),
        ("5 activity conservation", activity(summary)),
        ("6 average-case methodology", average_case(scratch.path())),
        ("7 degenerate inputs", degenerate()),
        ("8 determinism", determinism()),
    ];
    let mut all = true;
    for (name, r) in &results {
        all &= r.pass;
        println!(
            "{} criterion {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    let passed = results.iter().filter(|(_, r)| r.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
