//! Per-cycle CSV traces.
//!
//! Serial columns: `cycle,step_index,col_counters,row_counters,enabled_cells,column_update,step_done`.
//! Counter vectors hold the residual counts driving the unary lines during
//! the cycle, space-separated.
//!
//! Parallel columns: `cycle,enabled_cells,active_units,output_ready,col_done_0..col_done_{N-1}`,
//! where the `col_done_*` flags are sampled at the end of the cycle.

use std::io::Write;

use crate::counters::CounterBank;
use crate::error::Error;
use crate::parallel::ParallelEngine;
use crate::problem::GemmProblem;
use crate::serial::SerialEngine;
use crate::sim::{SimConfig, SimResult};

fn join_counts(bank: &CounterBank) -> (String, String) {
    let join =
        |cs: &[crate::counters::UnaryCounter]| cs.iter().map(|c| c.count().to_string()).collect::<Vec<_>>().join(" ");
    (join(bank.cols()), join(bank.rows()))
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn serial_trace_csv<W: Write>(p: &GemmProblem, config: impl Into<SimConfig>, out: W) -> Result<SimResult, Error> {
    let mut engine = SerialEngine::new(p, config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "cycle",
        "step_index",
        "col_counters",
        "row_counters",
        "enabled_cells",
        "column_update",
        "step_done",
    ])?;
    loop {
        let (cols, rows) = join_counts(engine.state().counters());
        let Some(rec) = engine.tick()? else { break };
        w.write_record([
            rec.cycle.to_string(),
            rec.step_index.to_string(),
            cols,
            rows,
            rec.enabled_cells.to_string(),
            flag(rec.column_update).to_owned(),
            flag(rec.step_done).to_owned(),
        ])?;
    }
    w.flush()?;
    Ok(engine.finish())
}

pub fn parallel_trace_csv<W: Write>(p: &GemmProblem, config: impl Into<SimConfig>, out: W) -> Result<SimResult, Error> {
    let mut engine = ParallelEngine::new(p, config)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["cycle", "enabled_cells", "active_units", "output_ready"]
        .map(String::from)
        .to_vec();
    header.extend((0..p.n()).map(|i| format!("col_done_{i}")));
    w.write_record(&header)?;
    while let Some(rec) = engine.tick()? {
        let st = engine.state();
        let mut row = vec![
            rec.cycle.to_string(),
            rec.enabled_cells.to_string(),
            rec.active_units.to_string(),
            flag(st.output_ready()).to_owned(),
        ];
        row.extend(st.units().iter().map(|u| flag(u.col_done()).to_owned()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(engine.finish())
}
