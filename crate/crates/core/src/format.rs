//! Problem file formats.
//!
//! Text: the first line holds `M N P w`, followed by M lines of N integers
//! (A), N lines of P integers (B) and M lines of P integers (C). Values are
//! whitespace-separated ASCII decimal. Blank lines are ignored.
//!
//! JSON: `{"m": .., "n": .., "p": .., "w": .., "a": [[..]], "b": [[..]], "c": [[..]]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LoadError, ParseError, ValidationError};
use crate::problem::{BitWidth, GemmProblem, Matrix};

#[derive(Debug, Serialize, Deserialize)]
struct ProblemJson {
    m: usize,
    n: usize,
    p: usize,
    w: u32,
    a: Vec<Vec<i64>>,
    b: Vec<Vec<i64>>,
    c: Vec<Vec<i64>>,
}

/// Parses either format, picking JSON when the first non-blank character is `{`.
pub fn parse_problem(input: &str) -> Result<GemmProblem, ParseError> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

fn parse_ints(line: &str, lineno: usize) -> Result<Vec<i64>, ParseError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| ParseError::new(lineno, format!("expected an integer, found {tok:?}")))
        })
        .collect()
}

fn invalid(line: usize, err: ValidationError) -> ParseError {
    ParseError::invalid(line, err)
}

pub fn parse_text(input: &str) -> Result<GemmProblem, ParseError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty input, expected header `M N P w`"))?;
    let header = parse_ints(header, header_line)?;
    let &[m, n, p, w] = header.as_slice() else {
        return Err(ParseError::new(
            header_line,
            format!("header must have 4 fields `M N P w`, found {}", header.len()),
        ));
    };
    let dim = |v: i64, name: &str| -> Result<usize, ParseError> {
        usize::try_from(v)
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| ParseError::new(header_line, format!("{name} must be a positive integer, got {v}")))
    };
    let (m, n, p) = (dim(m, "M")?, dim(n, "N")?, dim(p, "P")?);
    let width = u32::try_from(w)
        .map_err(|_| ValidationError::InvalidWidth { bits: 0 })
        .and_then(BitWidth::new)
        .map_err(|e| invalid(header_line, e))?;

    let mut last_line = header_line;
    let mut read_matrix = |rows: usize, cols: usize, name: &str| -> Result<Matrix, ParseError> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (lineno, line) = lines.next().ok_or_else(|| {
                ParseError::new(
                    last_line + 1,
                    format!("unexpected end of input: {name} needs {rows} rows, found {r}"),
                )
            })?;
            last_line = lineno;
            let values = parse_ints(line, lineno)?;
            if values.len() != cols {
                return Err(ParseError::new(
                    lineno,
                    format!("{name} row {r} needs {cols} values, found {}", values.len()),
                ));
            }
            data.extend(values);
        }
        Matrix::new(rows, cols, data).map_err(|e| invalid(last_line, e))
    };
    let a = read_matrix(m, n, "A")?;
    let b = read_matrix(n, p, "B")?;
    let c = read_matrix(m, p, "C")?;
    if let Some((lineno, _)) = lines.next() {
        return Err(ParseError::new(lineno, "unexpected trailing content after C"));
    }
    GemmProblem::new(a, b, c, width).map_err(|e| invalid(last_line, e))
}

pub fn parse_json(input: &str) -> Result<GemmProblem, ParseError> {
    let raw: ProblemJson = serde_json::from_str(input).map_err(|e| ParseError::new(e.line(), e.to_string()))?;
    let width = BitWidth::new(raw.w).map_err(|e| invalid(1, e))?;
    let a = Matrix::from_rows(&raw.a).map_err(|e| invalid(1, e))?;
    let b = Matrix::from_rows(&raw.b).map_err(|e| invalid(1, e))?;
    let c = Matrix::from_rows(&raw.c).map_err(|e| invalid(1, e))?;
    let declared = [("m", raw.m, a.rows()), ("n", raw.n, a.cols()), ("p", raw.p, b.cols())];
    for (field, declared, actual) in declared {
        if declared != actual {
            return Err(ParseError::new(
                1,
                format!("declared {field}={declared} disagrees with matrix shape ({actual})"),
            ));
        }
    }
    GemmProblem::new(a, b, c, width).map_err(|e| invalid(1, e))
}

pub fn to_text(p: &GemmProblem) -> String {
    let mut out = format!("{} {} {} {}\n", p.m(), p.n(), p.p(), p.width);
    for matrix in [&p.a, &p.b, &p.c] {
        for r in 0..matrix.rows() {
            let row: Vec<String> = matrix.row(r).iter().map(i64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn to_json(p: &GemmProblem) -> String {
    let raw = ProblemJson {
        m: p.m(),
        n: p.n(),
        p: p.p(),
        w: p.width.bits(),
        a: p.a.to_rows(),
        b: p.b.to_rows(),
        c: p.c.to_rows(),
    };
    serde_json::to_string(&raw).expect("plain data serializes")
}

pub fn load_problem(path: &Path) -> Result<GemmProblem, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_problem(&text).map_err(|source| LoadError::Parse {
        path: path.to_owned(),
        source,
    })
}
