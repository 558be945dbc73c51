//! Cycle-accurate model of the serial architecture: an index counter walks
//! the N steps one after another, a single column/row counter bank encodes
//! the current column of A and row of B, and an M×P array of up/down
//! counters (preloaded with C) accumulates the outer products.

use crate::counters::CounterBank;
use crate::error::SimError;
use crate::latency::LatencyBreakdown;
use crate::problem::GemmProblem;
use crate::sim::{unit_sign, ActivityStats, Instrumentation, OutputArray, OutputWidthPolicy, SimConfig, SimResult};

/// Architectural state of the serial design.
#[derive(Debug, Clone)]
pub struct SerialState {
    step_index: usize,
    counters: CounterBank,
    output: OutputArray,
    output_ready: bool,
    cycle: u64,
}

impl SerialState {
    /// Index counter value, in `0..=N`.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn counters(&self) -> &CounterBank {
        &self.counters
    }

    pub fn output_cells(&self) -> &[i64] {
        &self.output.cells
    }

    pub fn output_ready(&self) -> bool {
        self.output_ready
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }
}

/// What happened during one clock cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerialCycle {
    pub cycle: u64,
    /// Step being executed during this cycle.
    pub step_index: usize,
    pub enabled_cells: usize,
    pub column_update: bool,
    pub step_done: bool,
}

pub struct SerialEngine<'p> {
    problem: &'p GemmProblem,
    config: SimConfig,
    state: SerialState,
    step_started: u64,
    step_cycles: Vec<u64>,
    active_rows: Vec<(usize, bool)>,
}

impl<'p> SerialEngine<'p> {
    pub fn new(problem: &'p GemmProblem, config: impl Into<SimConfig>) -> Result<Self, SimError> {
        let config = config.into();
        problem.validate()?;
        config.policy.check(problem.width)?;
        let mut state = SerialState {
            step_index: 0,
            counters: CounterBank::new(problem.m(), problem.p()),
            output: OutputArray::new(&problem.c, config.policy),
            output_ready: false,
            cycle: 0,
        };
        state.counters.load(problem.a.col(0), problem.b.row(0));
        Ok(SerialEngine {
            problem,
            config,
            state,
            step_started: 0,
            step_cycles: Vec::with_capacity(problem.n()),
            active_rows: Vec::with_capacity(problem.p()),
        })
    }

    pub fn state(&self) -> &SerialState {
        &self.state
    }

    /// Cycles spent in each completed step.
    pub fn step_cycles(&self) -> &[u64] {
        &self.step_cycles
    }

    /// Advances one clock cycle; `None` once `output_ready` is asserted.
    pub fn tick(&mut self) -> Result<Option<SerialCycle>, SimError> {
        if self.state.output_ready {
            return Ok(None);
        }
        let st = &mut self.state;
        st.cycle += 1;
        let p_dim = self.problem.p();

        st.counters.sample_lines(true);
        self.active_rows.clear();
        self.active_rows.extend(
            st.counters
                .rows()
                .iter()
                .enumerate()
                .filter(|(_, r)| r.unary())
                .map(|(q, r)| (q, r.neg())),
        );
        let mut enabled = 0;
        if !self.active_rows.is_empty() {
            for (m, col) in st.counters.cols().iter().enumerate() {
                if !col.unary() {
                    continue;
                }
                for &(q, neg_row) in &self.active_rows {
                    let sign = unit_sign(col.neg(), neg_row, self.config.fault);
                    let (plus, minus) = if sign > 0 { (1, 0) } else { (0, 1) };
                    st.output.add(m * p_dim + q, sign, plus, minus, st.cycle)?;
                    enabled += 1;
                }
            }
        }

        let event = st.counters.advance();
        let record = SerialCycle {
            cycle: st.cycle,
            step_index: st.step_index,
            enabled_cells: enabled,
            column_update: event.column_update,
            step_done: event.step_done,
        };
        if event.step_done {
            self.step_cycles.push(st.cycle - self.step_started);
            self.step_started = st.cycle;
            st.step_index += 1;
            if st.step_index == self.problem.n() {
                st.output_ready = true;
                // lines fall once the array goes idle
                st.counters.sample_lines(false);
            } else {
                let i = st.step_index;
                st.counters.load(self.problem.a.col(i), self.problem.b.row(i));
            }
        }
        Ok(Some(record))
    }

    /// Runs to completion.
    pub fn run(mut self) -> Result<SimResult, SimError> {
        while self.tick()?.is_some() {}
        Ok(self.finish())
    }

    /// Collects the result; meaningful once `output_ready` is asserted.
    pub fn finish(self) -> SimResult {
        let st = self.state;
        let mut lines = Vec::new();
        Instrumentation::collect_lines(0, &st.counters, &mut lines);
        SimResult {
            y: st.output.to_matrix(self.problem.m()),
            cycles: st.cycle,
            activity: ActivityStats {
                output_cell_updates: st.output.updates(),
                unary_signal_transitions: st.counters.transitions(),
                counter_loads: st.counters.loads(),
            },
            instrumentation: Instrumentation {
                cell_increments: st.output.increments,
                cell_decrements: st.output.decrements,
                lines,
            },
        }
    }
}

/// Simulates the serial design cycle by cycle.
pub fn serial_run(p: &GemmProblem, policy: OutputWidthPolicy) -> Result<SimResult, SimError> {
    SerialEngine::new(p, policy)?.run()
}

/// Per-step cycle counts observed by the serial engine.
pub fn serial_step_trace(p: &GemmProblem) -> Result<LatencyBreakdown, SimError> {
    let mut engine = SerialEngine::new(p, OutputWidthPolicy::Unbounded)?;
    while engine.tick()?.is_some() {}
    Ok(LatencyBreakdown::from_steps(engine.step_cycles().to_vec()))
}
