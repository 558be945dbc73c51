//! Cycle-accurate model of the parallel architecture: N vector counters run
//! all steps at once and each output adder cell sums the N signed unit
//! contributions it receives per cycle into its register.

use crate::counters::CounterBank;
use crate::error::SimError;
use crate::latency::LatencyBreakdown;
use crate::problem::GemmProblem;
use crate::sim::{unit_sign, ActivityStats, Instrumentation, OutputArray, OutputWidthPolicy, SimConfig, SimResult};

/// One replicated step unit: vector generation plus column/row counters.
#[derive(Debug, Clone)]
pub struct VectorCounter {
    counters: CounterBank,
    col_done: bool,
    finished_at: u64,
}

impl VectorCounter {
    pub fn counters(&self) -> &CounterBank {
        &self.counters
    }

    /// Asserted once every column residual of this unit is zero.
    pub fn col_done(&self) -> bool {
        self.col_done
    }
}

#[derive(Debug, Clone)]
pub struct ParallelState {
    units: Vec<VectorCounter>,
    output: OutputArray,
    output_ready: bool,
    cycle: u64,
}

impl ParallelState {
    pub fn units(&self) -> &[VectorCounter] {
        &self.units
    }

    pub fn output_cells(&self) -> &[i64] {
        &self.output.cells
    }

    /// AND over every unit's `col_done`, registered at the end of a cycle.
    pub fn output_ready(&self) -> bool {
        self.output_ready
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelCycle {
    pub cycle: u64,
    /// Nonzero unit contributions summed into the array this cycle.
    pub enabled_cells: usize,
    pub active_units: usize,
}

pub struct ParallelEngine<'p> {
    problem: &'p GemmProblem,
    config: SimConfig,
    state: ParallelState,
    contributions: Vec<i64>,
    plus: Vec<u64>,
    minus: Vec<u64>,
}

impl<'p> ParallelEngine<'p> {
    pub fn new(problem: &'p GemmProblem, config: impl Into<SimConfig>) -> Result<Self, SimError> {
        let config = config.into();
        problem.validate()?;
        config.policy.check(problem.width)?;
        let units = (0..problem.n())
            .map(|i| {
                let mut counters = CounterBank::new(problem.m(), problem.p());
                counters.load(problem.a.col(i), problem.b.row(i));
                let col_done = counters.columns_done();
                VectorCounter {
                    counters,
                    col_done,
                    finished_at: 0,
                }
            })
            .collect();
        let cells = problem.m() * problem.p();
        Ok(ParallelEngine {
            problem,
            config,
            state: ParallelState {
                units,
                output: OutputArray::new(&problem.c, config.policy),
                output_ready: false,
                cycle: 0,
            },
            contributions: vec![0; cells],
            plus: vec![0; cells],
            minus: vec![0; cells],
        })
    }

    pub fn state(&self) -> &ParallelState {
        &self.state
    }

    /// Row-major per-cell adder inputs (sum of N contributions) of the last cycle.
    pub fn contributions(&self) -> &[i64] {
        &self.contributions
    }

    pub fn tick(&mut self) -> Result<Option<ParallelCycle>, SimError> {
        if self.state.output_ready {
            return Ok(None);
        }
        let st = &mut self.state;
        st.cycle += 1;
        let p_dim = self.problem.p();
        self.contributions.fill(0);
        self.plus.fill(0);
        self.minus.fill(0);

        let mut enabled = 0;
        let mut active_units = 0;
        for unit in &mut st.units {
            unit.counters.sample_lines(!unit.col_done);
            if unit.col_done {
                continue;
            }
            active_units += 1;
            let bank = &unit.counters;
            for (m, col) in bank.cols().iter().enumerate() {
                if !col.unary() {
                    continue;
                }
                for (q, row) in bank.rows().iter().enumerate() {
                    if !row.unary() {
                        continue;
                    }
                    let idx = m * p_dim + q;
                    let sign = unit_sign(col.neg(), row.neg(), self.config.fault);
                    self.contributions[idx] += sign;
                    if sign > 0 {
                        self.plus[idx] += 1;
                    } else {
                        self.minus[idx] += 1;
                    }
                    enabled += 1;
                }
            }
        }
        for idx in 0..self.contributions.len() {
            if self.plus[idx] + self.minus[idx] > 0 {
                st.output
                    .add(idx, self.contributions[idx], self.plus[idx], self.minus[idx], st.cycle)?;
            }
        }

        for unit in st.units.iter_mut().filter(|u| !u.col_done) {
            if unit.counters.advance().step_done {
                unit.col_done = true;
                unit.finished_at = st.cycle;
            }
        }
        st.output_ready = st.units.iter().all(|u| u.col_done);
        if st.output_ready {
            for unit in &mut st.units {
                unit.counters.sample_lines(false);
            }
        }
        Ok(Some(ParallelCycle {
            cycle: st.cycle,
            enabled_cells: enabled,
            active_units,
        }))
    }

    pub fn run(mut self) -> Result<SimResult, SimError> {
        while self.tick()?.is_some() {}
        Ok(self.finish())
    }

    /// Cycles each unit needed; units with an all-zero column count one
    /// control cycle.
    pub fn unit_cycles(&self) -> Vec<u64> {
        self.state.units.iter().map(|u| u.finished_at.max(1)).collect()
    }

    pub fn finish(self) -> SimResult {
        let st = self.state;
        let mut lines = Vec::new();
        for (i, unit) in st.units.iter().enumerate() {
            Instrumentation::collect_lines(i, &unit.counters, &mut lines);
        }
        SimResult {
            y: st.output.to_matrix(self.problem.m()),
            cycles: st.cycle,
            activity: ActivityStats {
                output_cell_updates: st.output.updates(),
                unary_signal_transitions: st.units.iter().map(|u| u.counters.transitions()).sum(),
                counter_loads: st.units.iter().map(|u| u.counters.loads()).sum(),
            },
            instrumentation: Instrumentation {
                cell_increments: st.output.increments,
                cell_decrements: st.output.decrements,
                lines,
            },
        }
    }
}

/// Simulates the parallel design cycle by cycle.
pub fn parallel_run(p: &GemmProblem, policy: OutputWidthPolicy) -> Result<SimResult, SimError> {
    ParallelEngine::new(p, policy)?.run()
}

/// Per-unit cycle counts observed by the parallel engine.
pub fn parallel_unit_trace(p: &GemmProblem) -> Result<LatencyBreakdown, SimError> {
    let mut engine = ParallelEngine::new(p, OutputWidthPolicy::Unbounded)?;
    while engine.tick()?.is_some() {}
    Ok(LatencyBreakdown::from_steps(engine.unit_cycles()))
}

/// Per-cycle adder input of output cell `(m, q)`, each value in `[-N, N]`.
pub fn parallel_cell_trace(p: &GemmProblem, m: usize, q: usize) -> Result<Vec<i64>, SimError> {
    let mut engine = ParallelEngine::new(p, OutputWidthPolicy::Unbounded)?;
    if m >= p.m() || q >= p.p() {
        return Err(SimError::CellOutOfBounds {
            row: m,
            col: q,
            rows: p.m(),
            cols: p.p(),
        });
    }
    let idx = m * p.p() + q;
    let mut trace = Vec::new();
    while engine.tick()?.is_some() {
        trace.push(engine.contributions()[idx]);
    }
    Ok(trace)
}
