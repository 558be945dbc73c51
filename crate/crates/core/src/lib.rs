//! Cycle-accurate simulation and latency modeling of temporal-unary GEMM
//! hardware.
//!
//! Operands are encoded as contiguous pulses whose length equals their
//! magnitude. Two architectures are modeled, both computing `Y = A·B + C`
//! exactly:
//!
//! * [`serial`]: one column/row counter bank walks the N outer-product
//!   steps one after another while an M×P array of up/down counters
//!   accumulates;
//! * [`parallel`]: N replicated vector counters run every step at once and
//!   each output adder cell sums N signed unit contributions per cycle.
//!
//! [`oracle`] is the binary reference, [`latency`] the closed-form cycle
//! model checked against both engines, and [`profiler`] derives
//! average-case latency from the per-operation maxima of a workload.

pub mod cli;
pub mod counters;
pub mod dump;
pub mod error;
pub mod format;
pub mod latency;
pub mod oracle;
pub mod parallel;
pub mod problem;
pub mod profiler;
pub mod serial;
pub mod sim;
pub mod trace;
pub mod verify;

pub use error::{Error, SimError, ValidationError};
pub use latency::{analytic_latency, avg_latency_from_max, worst_case_latency, LatencyBreakdown};
pub use oracle::{gemm_exact, max_abs_output};
pub use parallel::{parallel_cell_trace, parallel_run};
pub use problem::{random_problem, validate_problem, BitWidth, GemmProblem, Matrix};
pub use profiler::{estimate_workload_latency, profile_maxima, LatencySummary, WorkloadStats};
pub use serial::{serial_run, serial_step_trace};
pub use sim::{ActivityStats, OutputWidthPolicy, SimResult, Variant};
