//! Closed-form latency of both variants. Independent of the engines: the
//! formulas here are derived from operand magnitudes alone and the test
//! suites require them to agree with simulated cycle counts exactly.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::problem::{BitWidth, GemmProblem};
use crate::sim::Variant;

/// Per-step compute cycles and their serial (sum) and parallel (max)
/// aggregation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub per_step: Vec<u64>,
    pub serial_total: u64,
    pub parallel_total: u64,
}

impl LatencyBreakdown {
    pub fn from_steps(per_step: Vec<u64>) -> Self {
        let serial_total = per_step.iter().sum();
        let parallel_total = per_step.iter().copied().max().unwrap_or(0).max(1);
        LatencyBreakdown {
            per_step,
            serial_total,
            parallel_total,
        }
    }

    pub fn total(&self, variant: Variant) -> u64 {
        match variant {
            Variant::Serial => self.serial_total,
            Variant::Parallel => self.parallel_total,
        }
    }
}

/// Cycles of one step whose largest column magnitude is `col_max` and
/// largest row magnitude is `row_max`.
pub fn step_latency(col_max: u64, row_max: u64) -> u64 {
    if col_max == 0 {
        1
    } else {
        col_max * row_max.max(1)
    }
}

pub fn analytic_latency(p: &GemmProblem) -> Result<LatencyBreakdown, ValidationError> {
    p.validate()?;
    let per_step = (0..p.n())
        .map(|i| {
            let col_max = p.a.col(i).map(i64::unsigned_abs).max().unwrap_or(0);
            let row_max = p.b.row(i).iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            step_latency(col_max, row_max)
        })
        .collect();
    Ok(LatencyBreakdown::from_steps(per_step))
}

/// `N·(2^(w-1))²` for serial, `(2^(w-1))²` for parallel.
pub fn worst_case_latency(n: usize, width: BitWidth, variant: Variant) -> u64 {
    let step = width.max_magnitude().pow(2);
    match variant {
        Variant::Serial => n as u64 * step,
        Variant::Parallel => step,
    }
}

/// Upper-bound estimate assuming every step's largest column and row
/// magnitude equal `max_value`.
pub fn avg_latency_from_max(max_value: u64, n: usize, variant: Variant) -> u64 {
    let step = step_latency(max_value, max_value);
    match variant {
        Variant::Serial => n as u64 * step,
        Variant::Parallel => step,
    }
}

/// Real-valued form of [`avg_latency_from_max`], for plugging in a mean
/// magnitude. Magnitudes below one cost the one-cycle zero-step minimum.
pub fn latency_at_magnitude(magnitude: f64, n: usize, variant: Variant) -> f64 {
    let step = if magnitude < 1.0 { 1.0 } else { magnitude * magnitude };
    match variant {
        Variant::Serial => n as f64 * step,
        Variant::Parallel => step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{worst_case_problem, Matrix};

    #[test]
    fn running_example() {
        let p = GemmProblem::without_bias(
            Matrix::from_rows(&[[3, -2], [1, 0]]).unwrap(),
            Matrix::from_rows(&[[2, 1], [-1, 2]]).unwrap(),
            BitWidth::W4,
        )
        .unwrap();
        let l = analytic_latency(&p).unwrap();
        assert_eq!(l.per_step, vec![6, 4]);
        assert_eq!((l.serial_total, l.parallel_total), (10, 6));
    }

    #[test]
    fn all_zero_a() {
        let p = GemmProblem::without_bias(Matrix::zeros(3, 5), Matrix::from_rows(&[[1]; 5]).unwrap(), BitWidth::W2)
            .unwrap();
        let l = analytic_latency(&p).unwrap();
        assert_eq!(l.per_step, vec![1; 5]);
        assert_eq!((l.serial_total, l.parallel_total), (5, 1));
    }

    #[test]
    fn worst_case_formula() {
        assert_eq!(worst_case_latency(16, BitWidth::W8, Variant::Serial), 262_144);
        assert_eq!(worst_case_latency(16, BitWidth::W8, Variant::Parallel), 16_384);
        assert_eq!(worst_case_latency(1, BitWidth::W2, Variant::Serial), 4);
        assert_eq!(worst_case_latency(16, BitWidth::W2, Variant::Serial), 64);
        let l = analytic_latency(&worst_case_problem(16, 16, 16, BitWidth::W8)).unwrap();
        assert_eq!((l.serial_total, l.parallel_total), (262_144, 16_384));
    }

    #[test]
    fn estimate_from_max() {
        assert_eq!(avg_latency_from_max(41, 16, Variant::Serial), 26_896);
        assert_eq!(avg_latency_from_max(0, 16, Variant::Serial), 16);
        assert_eq!(avg_latency_from_max(0, 16, Variant::Parallel), 1);
        assert_eq!(
            avg_latency_from_max(128, 16, Variant::Serial),
            worst_case_latency(16, BitWidth::W8, Variant::Serial)
        );
        let ratio = 262_144.0 / avg_latency_from_max(41, 16, Variant::Serial) as f64;
        assert!((ratio - (128.0f64 / 41.0).powi(2)).abs() < 1e-12);
        assert_eq!(latency_at_magnitude(41.0, 16, Variant::Serial), 26_896.0);
        assert_eq!(latency_at_magnitude(0.5, 16, Variant::Parallel), 1.0);
    }
}
