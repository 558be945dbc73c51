//! Column/row counter bank that turns one column of A and one row of B
//! into temporal unary pulses.
//!
//! The serial design owns one bank and reloads it every step; the parallel
//! design replicates it once per step inside each vector counter. Both use
//! the same nested counting:
//!
//! * every cycle each nonzero row counter moves one count toward zero;
//! * once all row counters are zero, every nonzero column counter moves one
//!   count toward zero and, unless the columns are now exhausted, the row
//!   counters reload the step's row values on that same cycle;
//! * a bank whose columns are all zero at the start of a cycle spends that
//!   cycle as a control cycle and reports the step done.
//!
//! A step therefore lasts `C·max(R, 1)` cycles when `C > 0` and 1 cycle
//! otherwise, where `C`/`R` are the largest column/row magnitudes.

/// Loadable counter that counts toward zero, with its `unary` line
/// (asserted while the count is nonzero) and latched `neg` flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnaryCounter {
    count: i64,
    neg: bool,
    line: bool,
    loads: u64,
    transitions: u64,
}

impl UnaryCounter {
    pub fn count(&self) -> i64 {
        self.count
    }

    /// Sign flag latched at the most recent load.
    pub fn neg(&self) -> bool {
        self.neg
    }

    /// Level of the unary line: asserted iff the residual count is nonzero.
    pub fn unary(&self) -> bool {
        self.count != 0
    }

    pub fn loads(&self) -> u64 {
        self.loads
    }

    /// Edges observed on the unary line so far.
    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    pub(crate) fn load(&mut self, value: i64) {
        self.count = value;
        self.neg = value < 0;
        self.loads += 1;
    }

    /// Decrement if positive, increment if negative.
    pub(crate) fn advance(&mut self) {
        self.count -= self.count.signum();
    }

    /// Records the line level driven during the current cycle.
    pub(crate) fn sample(&mut self, level: bool) {
        if level != self.line {
            self.transitions += 1;
            self.line = level;
        }
    }
}

/// What a bank did at the end of one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BankEvent {
    pub column_update: bool,
    pub rows_reloaded: bool,
    pub step_done: bool,
}

#[derive(Debug, Clone)]
pub struct CounterBank {
    cols: Vec<UnaryCounter>,
    rows: Vec<UnaryCounter>,
    row_values: Vec<i64>,
}

impl CounterBank {
    pub(crate) fn new(m: usize, p: usize) -> Self {
        CounterBank {
            cols: vec![UnaryCounter::default(); m],
            rows: vec![UnaryCounter::default(); p],
            row_values: vec![0; p],
        }
    }

    pub(crate) fn load(&mut self, column: impl IntoIterator<Item = i64>, row: &[i64]) {
        for (counter, v) in self.cols.iter_mut().zip(column) {
            counter.load(v);
        }
        self.row_values.copy_from_slice(row);
        self.reload_rows();
    }

    fn reload_rows(&mut self) {
        for (counter, &v) in self.rows.iter_mut().zip(&self.row_values) {
            counter.load(v);
        }
    }

    pub fn cols(&self) -> &[UnaryCounter] {
        &self.cols
    }

    pub fn rows(&self) -> &[UnaryCounter] {
        &self.rows
    }

    pub fn columns_done(&self) -> bool {
        self.cols.iter().all(|c| !c.unary())
    }

    /// Drives every unary line for this cycle; a gated bank holds its lines low.
    pub(crate) fn sample_lines(&mut self, enabled: bool) {
        for c in self.cols.iter_mut().chain(self.rows.iter_mut()) {
            let level = enabled && c.unary();
            c.sample(level);
        }
    }

    /// End-of-cycle counter update.
    pub(crate) fn advance(&mut self) -> BankEvent {
        let mut event = BankEvent::default();
        if self.columns_done() {
            event.step_done = true;
            return event;
        }
        for r in &mut self.rows {
            r.advance();
        }
        if self.rows.iter().all(|r| !r.unary()) {
            for c in &mut self.cols {
                c.advance();
            }
            event.column_update = true;
            if self.columns_done() {
                event.step_done = true;
            } else {
                self.reload_rows();
                event.rows_reloaded = true;
            }
        }
        event
    }

    pub(crate) fn loads(&self) -> u64 {
        self.cols.iter().chain(&self.rows).map(UnaryCounter::loads).sum()
    }

    pub(crate) fn transitions(&self) -> u64 {
        self.cols.iter().chain(&self.rows).map(UnaryCounter::transitions).sum()
    }
}
