//! Randomized equivalence checking: both engines against the oracle, the
//! analytic latency against simulated cycles, plus the activity and
//! transition invariants, over a seeded corpus of problems.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::latency::analytic_latency;
use crate::oracle::{gemm_exact, unit_update_count};
use crate::parallel::ParallelEngine;
use crate::problem::{random_problem, BitWidth, GemmProblem, Matrix};
use crate::serial::SerialEngine;
use crate::sim::{InjectedFault, OutputWidthPolicy, SimConfig, SimResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Randomized trials with dims drawn from `1..=max_dim`.
    pub trials: usize,
    pub max_dim: usize,
    /// Widths cycled through in trial order.
    pub widths: Vec<BitWidth>,
    pub seed: u64,
    /// Extra fixed-size trials appended after the randomized ones.
    pub large_trials: usize,
    pub large_dim: usize,
    pub large_width: BitWidth,
    pub fault: Option<InjectedFault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 10_000,
            max_dim: 8,
            widths: vec![BitWidth::W2, BitWidth::W4, BitWidth::W8],
            seed: 0,
            large_trials: 100,
            large_dim: 16,
            large_width: BitWidth::W8,
            fault: None,
        }
    }
}

/// Parameters of one trial; `random_problem` regenerates it exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub index: usize,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub width: BitWidth,
    pub seed: u64,
}

impl TrialSpec {
    pub fn problem(&self) -> GemmProblem {
        random_problem(self.m, self.n, self.p, self.width, self.seed).expect("trial dims are positive")
    }
}

/// Individual property checked on every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Serial output equals the oracle.
    SerialExact,
    ParallelExact,
    /// Analytic serial total equals simulated serial cycles.
    SerialLatency,
    ParallelLatency,
    /// Every unary line shows at most two edges per load.
    SerialTransitions,
    ParallelTransitions,
    /// `output_cell_updates` equals `Σ|A||B|`.
    SerialActivity,
    ParallelActivity,
    /// Serial and parallel runs perform the same unit updates and counter
    /// loads. Edge counts legitimately differ: serial lines are shared
    /// across steps.
    ActivityAgreement,
    /// Engine returned an error.
    Simulation,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::SerialExact,
        Check::ParallelExact,
        Check::SerialLatency,
        Check::ParallelLatency,
        Check::SerialTransitions,
        Check::ParallelTransitions,
        Check::SerialActivity,
        Check::ParallelActivity,
        Check::ActivityAgreement,
        Check::Simulation,
    ];
}

/// Deterministic trial list: the ChaCha8 stream seeded with `cfg.seed`
/// yields dims and a problem seed per trial.
pub fn trial_specs(cfg: &VerifyConfig) -> Vec<TrialSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_dim = cfg.max_dim.max(1);
    let mut specs = Vec::with_capacity(cfg.trials + cfg.large_trials);
    for index in 0..cfg.trials {
        let width = cfg.widths[index % cfg.widths.len()];
        let m = rng.random_range(1..=max_dim);
        let n = rng.random_range(1..=max_dim);
        let p = rng.random_range(1..=max_dim);
        specs.push(TrialSpec {
            index,
            m,
            n,
            p,
            width,
            seed: rng.next_u64(),
        });
    }
    for k in 0..cfg.large_trials {
        specs.push(TrialSpec {
            index: cfg.trials + k,
            m: cfg.large_dim,
            n: cfg.large_dim,
            p: cfg.large_dim,
            width: cfg.large_width,
            seed: rng.next_u64(),
        });
    }
    specs
}

/// Runs both engines on `p` and returns every failed check.
pub fn check_problem(p: &GemmProblem, fault: Option<InjectedFault>) -> Vec<Check> {
    let config = SimConfig {
        policy: OutputWidthPolicy::Unbounded,
        fault,
    };
    let (Ok(expected), Ok(latency)) = (gemm_exact(p), analytic_latency(p)) else {
        return vec![Check::Simulation];
    };
    let serial = SerialEngine::new(p, config).and_then(SerialEngine::run);
    let parallel = ParallelEngine::new(p, config).and_then(ParallelEngine::run);
    let (Ok(serial), Ok(parallel)) = (serial, parallel) else {
        return vec![Check::Simulation];
    };
    let updates = unit_update_count(p);
    let mut failed = Vec::new();
    let mut check = |ok: bool, c: Check| {
        if !ok {
            failed.push(c);
        }
    };
    let per_engine = |r: &SimResult| {
        (
            r.y == expected,
            r.instrumentation.transition_bound_holds(),
            r.activity.output_cell_updates == updates,
        )
    };
    let (s_exact, s_trans, s_act) = per_engine(&serial);
    let (p_exact, p_trans, p_act) = per_engine(&parallel);
    check(s_exact, Check::SerialExact);
    check(p_exact, Check::ParallelExact);
    check(serial.cycles == latency.serial_total, Check::SerialLatency);
    check(parallel.cycles == latency.parallel_total, Check::ParallelLatency);
    check(s_trans, Check::SerialTransitions);
    check(p_trans, Check::ParallelTransitions);
    check(s_act, Check::SerialActivity);
    check(p_act, Check::ParallelActivity);
    check(
        serial.activity.output_cell_updates == parallel.activity.output_cell_updates
            && serial.activity.counter_loads == parallel.activity.counter_loads,
        Check::ActivityAgreement,
    );
    failed
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: TrialSpec,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Number of trials failing each check; every check is listed.
    pub check_failures: BTreeMap<Check, usize>,
    /// Failures in trial order, capped at 20.
    pub failures: Vec<Failure>,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

const MAX_REPORTED_FAILURES: usize = 20;

/// Runs every trial (concurrently) and aggregates in trial order.
pub fn run_verify(cfg: &VerifyConfig) -> VerifySummary {
    let specs = trial_specs(cfg);
    let outcomes: Vec<Vec<Check>> = specs
        .par_iter()
        .map(|spec| check_problem(&spec.problem(), cfg.fault))
        .collect();
    let mut check_failures: BTreeMap<Check, usize> = Check::ALL.iter().map(|&c| (c, 0)).collect();
    let mut failures = Vec::new();
    let mut failed = 0;
    for (spec, checks) in specs.iter().zip(outcomes) {
        if checks.is_empty() {
            continue;
        }
        failed += 1;
        for c in &checks {
            *check_failures.entry(*c).or_default() += 1;
        }
        if failures.len() < MAX_REPORTED_FAILURES {
            failures.push(Failure { trial: *spec, checks });
        }
    }
    VerifySummary {
        trials: specs.len(),
        passed: specs.len() - failed,
        failed,
        check_failures,
        failures,
    }
}

fn remove_row(m: &Matrix, row: usize) -> Matrix {
    let rows: Vec<&[i64]> = (0..m.rows()).filter(|&r| r != row).map(|r| m.row(r)).collect();
    Matrix::from_rows(&rows).expect("at least one row remains")
}

fn remove_col(m: &Matrix, col: usize) -> Matrix {
    let rows: Vec<Vec<i64>> = (0..m.rows())
        .map(|r| {
            m.row(r)
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != col)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows).expect("at least one column remains")
}

fn smaller_candidates(p: &GemmProblem) -> Vec<GemmProblem> {
    let mut out = Vec::new();
    let with = |a: Matrix, b: Matrix, c: Matrix| GemmProblem {
        a,
        b,
        c,
        width: p.width,
    };
    for r in 0..p.m() {
        if p.m() > 1 {
            out.push(with(remove_row(&p.a, r), p.b.clone(), remove_row(&p.c, r)));
        }
    }
    for q in 0..p.p() {
        if p.p() > 1 {
            out.push(with(p.a.clone(), remove_col(&p.b, q), remove_col(&p.c, q)));
        }
    }
    for i in 0..p.n() {
        if p.n() > 1 {
            out.push(with(remove_col(&p.a, i), remove_row(&p.b, i), p.c.clone()));
        }
    }
    // shrink individual values toward zero
    for which in 0..3 {
        let base = [&p.a, &p.b, &p.c][which];
        for idx in 0..base.data().len() {
            let v = base.data()[idx];
            for smaller in [0, v / 2] {
                if smaller == v {
                    continue;
                }
                let mut data = base.data().to_vec();
                data[idx] = smaller;
                let m = Matrix::new(base.rows(), base.cols(), data).unwrap();
                out.push(match which {
                    0 => with(m, p.b.clone(), p.c.clone()),
                    1 => with(p.a.clone(), m, p.c.clone()),
                    _ => with(p.a.clone(), p.b.clone(), m),
                });
            }
        }
    }
    out
}

/// Greedily shrinks a failing problem while it keeps failing.
pub fn minimize(problem: &GemmProblem, fault: Option<InjectedFault>) -> GemmProblem {
    let mut current = problem.clone();
    if check_problem(&current, fault).is_empty() {
        return current;
    }
    'outer: loop {
        for candidate in smaller_candidates(&current) {
            if !check_problem(&candidate, fault).is_empty() {
                current = candidate;
                continue 'outer;
            }
        }
        return current;
    }
}
