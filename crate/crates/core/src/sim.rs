//! Types shared by the serial and parallel engines.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::counters::CounterBank;
use crate::error::SimError;
use crate::problem::{BitWidth, Matrix};

/// Which hardware variant to simulate or model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Serial,
    Parallel,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Serial => "serial",
            Variant::Parallel => "parallel",
        })
    }
}

/// Width of the output accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "bits")]
pub enum OutputWidthPolicy {
    #[default]
    Unbounded,
    /// Two's-complement register of the given width; leaving its range at
    /// any cycle is an error.
    Fixed(u32),
}

impl OutputWidthPolicy {
    pub(crate) fn check(self, width: BitWidth) -> Result<(), SimError> {
        match self {
            OutputWidthPolicy::Fixed(bits) if bits < width.bits() || bits > 64 => Err(SimError::OutputWidthTooNarrow {
                bits,
                width: width.bits(),
            }),
            _ => Ok(()),
        }
    }

    pub(crate) fn bounds(self) -> Option<(i64, i64, u32)> {
        match self {
            OutputWidthPolicy::Unbounded => None,
            OutputWidthPolicy::Fixed(64) => Some((i64::MIN, i64::MAX, 64)),
            OutputWidthPolicy::Fixed(bits) => Some((-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1, bits)),
        }
    }
}

/// Deliberate miswiring used to check that verification catches faults.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InjectedFault {
    /// Cells decrement when both inputs are negative.
    NegNegDecrements,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimConfig {
    pub policy: OutputWidthPolicy,
    #[doc(hidden)]
    pub fault: Option<InjectedFault>,
}

impl From<OutputWidthPolicy> for SimConfig {
    fn from(policy: OutputWidthPolicy) -> Self {
        SimConfig { policy, fault: None }
    }
}

/// Direction of one output update: +1 when the signs agree, -1 otherwise.
#[inline]
pub(crate) fn unit_sign(neg_col: bool, neg_row: bool, fault: Option<InjectedFault>) -> i64 {
    match fault {
        Some(InjectedFault::NegNegDecrements) if neg_col && neg_row => -1,
        _ if neg_col == neg_row => 1,
        _ => -1,
    }
}

/// Dynamic activity counters of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityStats {
    /// ±1 accumulator updates summed over every output cell.
    pub output_cell_updates: u64,
    /// Rising plus falling edges summed over all unary column/row lines.
    pub unary_signal_transitions: u64,
    /// Load events into column/row counters (each counter counts separately).
    pub counter_loads: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Column,
    Row,
}

/// Per-line activity. `unit` is the vector counter index in the parallel
/// design and always 0 in the serial one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineActivity {
    pub kind: LineKind,
    pub unit: usize,
    pub index: usize,
    pub loads: u64,
    pub transitions: u64,
}

/// Per-cell and per-line detail behind [`ActivityStats`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instrumentation {
    /// Row-major count of +1 updates per output cell.
    pub cell_increments: Vec<u64>,
    /// Row-major count of -1 updates per output cell.
    pub cell_decrements: Vec<u64>,
    pub lines: Vec<LineActivity>,
}

impl Instrumentation {
    /// True when no unary line shows more than two edges per load.
    pub fn transition_bound_holds(&self) -> bool {
        self.lines.iter().all(|l| l.transitions <= 2 * l.loads)
    }

    pub(crate) fn collect_lines(unit: usize, bank: &CounterBank, out: &mut Vec<LineActivity>) {
        let cols = bank.cols().iter().enumerate().map(|(i, c)| (LineKind::Column, i, c));
        let rows = bank.rows().iter().enumerate().map(|(i, c)| (LineKind::Row, i, c));
        out.extend(cols.chain(rows).map(|(kind, index, c)| LineActivity {
            kind,
            unit,
            index,
            loads: c.loads(),
            transitions: c.transitions(),
        }));
    }
}

/// Outcome of one simulated GEMM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    /// Final accumulator contents, `A·B + C`, never clamped.
    pub y: Matrix,
    pub cycles: u64,
    pub activity: ActivityStats,
    pub instrumentation: Instrumentation,
}

/// Output accumulators with optional register-width enforcement.
#[derive(Debug, Clone)]
pub(crate) struct OutputArray {
    pub cells: Vec<i64>,
    pub increments: Vec<u64>,
    pub decrements: Vec<u64>,
    cols: usize,
    bounds: Option<(i64, i64, u32)>,
}

impl OutputArray {
    pub fn new(c: &Matrix, policy: OutputWidthPolicy) -> Self {
        let len = c.data().len();
        OutputArray {
            cells: c.data().to_vec(),
            increments: vec![0; len],
            decrements: vec![0; len],
            cols: c.cols(),
            bounds: policy.bounds(),
        }
    }

    /// Adds `delta` to cell `idx` and records `plus`/`minus` unit updates.
    #[inline]
    pub fn add(&mut self, idx: usize, delta: i64, plus: u64, minus: u64, cycle: u64) -> Result<(), SimError> {
        self.cells[idx] += delta;
        self.increments[idx] += plus;
        self.decrements[idx] += minus;
        if let Some((lo, hi, bits)) = self.bounds {
            let value = self.cells[idx];
            if value < lo || value > hi {
                return Err(SimError::Overflow {
                    row: idx / self.cols,
                    col: idx % self.cols,
                    cycle,
                    value,
                    bits,
                });
            }
        }
        Ok(())
    }

    pub fn updates(&self) -> u64 {
        self.increments.iter().chain(&self.decrements).sum()
    }

    pub fn to_matrix(&self, rows: usize) -> Matrix {
        Matrix::new(rows, self.cols, self.cells.clone()).expect("output shape matches C")
    }
}
