//! Plain binary reference GEMM, the ground truth for both simulators.

use crate::error::ValidationError;
use crate::problem::{GemmProblem, Matrix};

/// `Y = A·B + C` with straightforward triple-loop accumulation in `i64`.
pub fn gemm_exact(p: &GemmProblem) -> Result<Matrix, ValidationError> {
    p.validate()?;
    Ok(gemm_unchecked(&p.a, &p.b, &p.c))
}

/// Same arithmetic without range validation; shapes must conform.
pub(crate) fn gemm_unchecked(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    let mut y = c.clone();
    for m in 0..a.rows() {
        for q in 0..b.cols() {
            let dot: i64 = (0..a.cols()).map(|i| a.get(m, i) * b.get(i, q)).sum();
            y.set(m, q, y.get(m, q) + dot);
        }
    }
    y
}

/// Largest `|Y[m][q]|` over the exact result.
pub fn max_abs_output(p: &GemmProblem) -> Result<u64, ValidationError> {
    Ok(gemm_exact(p)?.max_abs())
}

/// `Σ_{m,i,q} |A[m][i]|·|B[i][q]|`: the number of ±1 output updates any
/// temporal-unary execution performs.
pub fn unit_update_count(p: &GemmProblem) -> u64 {
    let mut total = 0u64;
    for i in 0..p.n() {
        let col: u64 = p.a.col(i).map(i64::unsigned_abs).sum();
        let row: u64 = p.b.row(i).iter().map(|v| v.unsigned_abs()).sum();
        total += col * row;
    }
    total
}
