//! Operand types shared by every simulator: bit-widths, dense integer
//! matrices and validated GEMM problem instances.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Smallest supported operand width.
pub const MIN_WIDTH: u32 = 2;
/// Largest supported operand width. Keeps every reachable accumulator value
/// well inside `i64` for inner dimensions up to 4096.
pub const MAX_WIDTH: u32 = 16;

/// Two's-complement operand width in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct BitWidth(u32);

impl BitWidth {
    pub const W2: BitWidth = BitWidth(2);
    pub const W4: BitWidth = BitWidth(4);
    pub const W8: BitWidth = BitWidth(8);

    pub fn new(bits: u32) -> Result<Self, ValidationError> {
        if (MIN_WIDTH..=MAX_WIDTH).contains(&bits) {
            Ok(BitWidth(bits))
        } else {
            Err(ValidationError::InvalidWidth { bits })
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Most negative representable value, `-2^(w-1)`.
    pub fn min_value(self) -> i64 {
        -(1i64 << (self.0 - 1))
    }

    /// Most positive representable value, `2^(w-1) - 1`.
    pub fn max_value(self) -> i64 {
        (1i64 << (self.0 - 1)) - 1
    }

    /// Largest magnitude an operand can carry, `2^(w-1)`. Only the most
    /// negative value attains it.
    pub fn max_magnitude(self) -> u64 {
        1u64 << (self.0 - 1)
    }

    pub fn contains(self, value: i64) -> bool {
        (self.min_value()..=self.max_value()).contains(&value)
    }
}

impl TryFrom<u32> for BitWidth {
    type Error = ValidationError;

    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        BitWidth::new(bits)
    }
}

impl From<BitWidth> for u32 {
    fn from(w: BitWidth) -> u32 {
        w.0
    }
}

impl fmt::Display for BitWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense row-major matrix of signed integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, ValidationError> {
        if rows == 0 || cols == 0 {
            return Err(ValidationError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(ValidationError::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, ValidationError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(ValidationError::RaggedRow {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn col(&self, col: usize) -> impl Iterator<Item = i64> + '_ {
        (0..self.rows).map(move |r| self.get(r, col))
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols).map(<[i64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> u64 {
        self.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    /// First element outside the two's-complement range of `width`, as
    /// `(row, col, value)`.
    pub fn first_out_of_range(&self, width: BitWidth) -> Option<(usize, usize, i64)> {
        self.data
            .iter()
            .position(|&v| !width.contains(v))
            .map(|idx| (idx / self.cols, idx % self.cols, self.data[idx]))
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Names the three input operands in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    A,
    B,
    C,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Operand::A => "A",
            Operand::B => "B",
            Operand::C => "C",
        };
        f.write_str(s)
    }
}

/// One `Y = A·B + C` instance: `A` is M×N, `B` is N×P, `C` is M×P.
///
/// Fields are public so that callers (and the verification shrinker) can
/// assemble arbitrary instances; run [`GemmProblem::validate`] before
/// handing one to anything that assumes the invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GemmProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub width: BitWidth,
}

impl GemmProblem {
    /// Builds and validates a problem.
    pub fn new(a: Matrix, b: Matrix, c: Matrix, width: BitWidth) -> Result<Self, ValidationError> {
        let p = GemmProblem { a, b, c, width };
        p.validate()?;
        Ok(p)
    }

    /// Problem with `C = 0`.
    pub fn without_bias(a: Matrix, b: Matrix, width: BitWidth) -> Result<Self, ValidationError> {
        let c = Matrix::zeros(a.rows(), b.cols());
        GemmProblem::new(a, b, c, width)
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn p(&self) -> usize {
        self.b.cols()
    }

    /// Checks conformance first, then operand ranges in A, B, C order, and
    /// reports the first violation found.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let dims = [
            ("a.cols = b.rows", self.a.cols(), self.b.rows()),
            ("a.rows = c.rows", self.a.rows(), self.c.rows()),
            ("b.cols = c.cols", self.b.cols(), self.c.cols()),
        ];
        for (constraint, left, right) in dims {
            if left != right {
                return Err(ValidationError::DimensionMismatch {
                    constraint,
                    left,
                    right,
                });
            }
        }
        for (operand, matrix) in [(Operand::A, &self.a), (Operand::B, &self.b), (Operand::C, &self.c)] {
            if let Some((row, col, value)) = matrix.first_out_of_range(self.width) {
                return Err(ValidationError::OutOfRange {
                    operand,
                    row,
                    col,
                    value,
                    width: self.width.bits(),
                    min: self.width.min_value(),
                    max: self.width.max_value(),
                });
            }
        }
        Ok(())
    }
}

/// Verdict-style wrapper around [`GemmProblem::validate`].
pub fn validate_problem(p: &GemmProblem) -> Result<(), ValidationError> {
    p.validate()
}

/// Draws a problem with every element uniform over the full
/// two's-complement range of `width`.
///
/// The generator is ChaCha8 (`rand_chacha`) seeded through
/// `SeedableRng::seed_from_u64(seed)`; elements are drawn with
/// `Rng::random_range` in the order A, B, C, each row-major. The stream is
/// platform independent, so a seed reproduces the same problem everywhere.
pub fn random_problem(
    m: usize,
    n: usize,
    p: usize,
    width: BitWidth,
    seed: u64,
) -> Result<GemmProblem, ValidationError> {
    if m == 0 || n == 0 || p == 0 {
        return Err(ValidationError::EmptyDimension { m, n, p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (width.min_value(), width.max_value());
    let mut draw = |rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| rng.random_range(lo..=hi)).collect();
        Matrix::new(rows, cols, data)
    };
    let a = draw(m, n)?;
    let b = draw(n, p)?;
    let c = draw(m, p)?;
    GemmProblem::new(a, b, c, width)
}

/// Problem whose A and B are filled with `-2^(w-1)` and C is zero: every
/// step runs for the maximum possible number of cycles.
pub fn worst_case_problem(m: usize, n: usize, p: usize, width: BitWidth) -> GemmProblem {
    let v = width.min_value();
    let a = Matrix::new(m, n, vec![v; m * n]).expect("positive dims");
    let b = Matrix::new(n, p, vec![v; n * p]).expect("positive dims");
    GemmProblem::without_bias(a, b, width).expect("in-range by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn width_ranges() {
        let w4 = BitWidth::W4;
        assert_eq!((w4.min_value(), w4.max_value(), w4.max_magnitude()), (-8, 7, 8));
        let w8 = BitWidth::W8;
        assert_eq!((w8.min_value(), w8.max_value(), w8.max_magnitude()), (-128, 127, 128));
        assert_eq!(BitWidth::W2.min_value(), -2);
        assert!(BitWidth::new(1).is_err());
        assert!(BitWidth::new(17).is_err());
    }

    #[test]
    fn in_range_problem_is_valid() {
        let p = GemmProblem {
            a: m(&[&[-8, 7], &[0, 3]]),
            b: m(&[&[1, -1], &[7, -8]]),
            c: Matrix::zeros(2, 2),
            width: BitWidth::W4,
        };
        assert_eq!(validate_problem(&p), Ok(()));
    }

    #[test]
    fn element_eight_is_out_of_range_at_width_four() {
        let p = GemmProblem {
            a: m(&[&[1, 2], &[3, 4]]),
            b: m(&[&[1, 8], &[0, 0]]),
            c: Matrix::zeros(2, 2),
            width: BitWidth::W4,
        };
        match validate_problem(&p) {
            Err(ValidationError::OutOfRange {
                operand: Operand::B,
                row: 0,
                col: 1,
                value: 8,
                ..
            }) => {}
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn inner_dimension_mismatch() {
        let p = GemmProblem {
            a: Matrix::zeros(2, 3),
            b: Matrix::zeros(2, 2),
            c: Matrix::zeros(2, 2),
            width: BitWidth::W4,
        };
        assert!(matches!(
            validate_problem(&p),
            Err(ValidationError::DimensionMismatch {
                constraint: "a.cols = b.rows",
                left: 3,
                right: 2
            })
        ));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matches!(
            Matrix::from_rows(&[vec![1, 2], vec![3]]),
            Err(ValidationError::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    fn random_problem_is_deterministic() {
        let x = random_problem(2, 2, 2, BitWidth::W2, 7).unwrap();
        let y = random_problem(2, 2, 2, BitWidth::W2, 7).unwrap();
        assert_eq!(x, y);
        let z = random_problem(2, 2, 2, BitWidth::W2, 8).unwrap();
        assert_ne!(x, z);
    }

    #[test]
    fn random_problem_stays_in_range() {
        let p = random_problem(60, 60, 60, BitWidth::W4, 3).unwrap();
        let all: Vec<i64> = [p.a.data(), p.b.data(), p.c.data()].concat();
        assert!(all.len() >= 10_000);
        assert!(all.iter().all(|v| (-8..=7).contains(v)));
        // the extremes should both show up in this many draws
        assert!(all.contains(&-8) && all.contains(&7));
    }

    #[test]
    fn single_element_problem() {
        let p = random_problem(1, 1, 1, BitWidth::W8, 42).unwrap();
        assert_eq!((p.m(), p.n(), p.p()), (1, 1, 1));
        assert!(random_problem(0, 1, 1, BitWidth::W8, 42).is_err());
    }
}
