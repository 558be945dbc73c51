//! Workload profiling: the distribution of per-operation maximum operand
//! magnitudes and the average-case latency it implies.
//!
//! One ingested tensor counts as one operation. Problem files contribute
//! their A and B operands as two tensors (C never reaches the unary
//! counters); binary dumps contribute one tensor each.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dump::{self, Tensor};
use crate::error::{Error, LoadError, ProfileError};
use crate::format;
use crate::latency::{avg_latency_from_max, latency_at_magnitude, worst_case_latency};
use crate::problem::{BitWidth, Matrix};
use crate::sim::Variant;

/// Histogram of per-operation maxima over magnitudes `0..=2^(w-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadStats {
    pub width: BitWidth,
    pub histogram: Vec<u64>,
    pub n_operations: u64,
    /// Sum of all per-operation maxima; `mean_max = sum_max / n_operations`.
    pub sum_max: u64,
}

impl WorkloadStats {
    pub fn empty(width: BitWidth) -> Self {
        WorkloadStats {
            width,
            histogram: vec![0; width.max_magnitude() as usize + 1],
            n_operations: 0,
            sum_max: 0,
        }
    }

    /// Records one operation whose largest magnitude is `max`.
    pub fn record(&mut self, max: u64) {
        self.histogram[max as usize] += 1;
        self.n_operations += 1;
        self.sum_max += max;
    }

    /// Associative, commutative merge of partial statistics.
    pub fn merge(&mut self, other: &WorkloadStats) -> Result<(), ProfileError> {
        if self.width != other.width {
            return Err(ProfileError::WidthMismatch {
                left: self.width.bits(),
                right: other.width.bits(),
            });
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.n_operations += other.n_operations;
        self.sum_max += other.sum_max;
        Ok(())
    }

    pub fn mean_max(&self) -> f64 {
        if self.n_operations == 0 {
            0.0
        } else {
            self.sum_max as f64 / self.n_operations as f64
        }
    }

    /// Percentage of operations at each magnitude.
    pub fn percent(&self) -> Vec<f64> {
        let n = self.n_operations as f64;
        self.histogram.iter().map(|&c| 100.0 * c as f64 / n).collect()
    }

    /// Percentage of operations whose maximum is `<= k`, for every `k`.
    pub fn cdf(&self) -> Vec<f64> {
        let n = self.n_operations as f64;
        let mut cumulative = 0u64;
        self.histogram
            .iter()
            .map(|&c| {
                cumulative += c;
                100.0 * cumulative as f64 / n
            })
            .collect()
    }

    /// CSV with columns `value,count,percent,cumulative_percent`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "count", "percent", "cumulative_percent"])?;
        for (value, ((count, pct), cum)) in self.histogram.iter().zip(self.percent()).zip(self.cdf()).enumerate() {
            w.write_record([
                value.to_string(),
                count.to_string(),
                format!("{pct:.6}"),
                format!("{cum:.6}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds statistics from a sequence of tensors, one operation per tensor.
pub fn profile_maxima<'t, I>(tensors: I, width: BitWidth) -> Result<WorkloadStats, ProfileError>
where
    I: IntoIterator<Item = &'t Tensor>,
{
    let mut stats = WorkloadStats::empty(width);
    for (t, tensor) in tensors.into_iter().enumerate() {
        if let Some(index) = tensor.data.iter().position(|&v| !width.contains(v)) {
            return Err(ProfileError::OutOfRange {
                tensor: t,
                index,
                value: tensor.data[index],
                width: width.bits(),
            });
        }
        stats.record(tensor.max_abs());
    }
    if stats.n_operations == 0 {
        return Err(ProfileError::EmptySource);
    }
    Ok(stats)
}

fn matrix_tensor(m: &Matrix) -> Tensor {
    Tensor::new(vec![m.rows(), m.cols()], m.data().to_vec())
}

/// Loads every tensor a file contributes: a binary dump (recognized by its
/// magic) or a text/JSON problem file.
pub fn load_workload_file(path: &Path) -> Result<Vec<Tensor>, LoadError> {
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    if bytes.starts_with(&dump::MAGIC) {
        let t = dump::decode(&bytes).map_err(|source| LoadError::Dump {
            path: path.to_owned(),
            source,
        })?;
        return Ok(vec![t]);
    }
    let text = String::from_utf8_lossy(&bytes);
    let problem = format::parse_problem(&text).map_err(|source| LoadError::Parse {
        path: path.to_owned(),
        source,
    })?;
    Ok(vec![matrix_tensor(&problem.a), matrix_tensor(&problem.b)])
}

/// Profiles files concurrently and merges the partial histograms. The
/// result does not depend on scheduling order.
pub fn profile_paths(paths: &[PathBuf], width: BitWidth) -> Result<WorkloadStats, Error> {
    if paths.is_empty() {
        return Err(ProfileError::EmptySource.into());
    }
    let partials: Vec<WorkloadStats> = paths
        .par_iter()
        .map(|path| -> Result<WorkloadStats, Error> {
            let tensors = load_workload_file(path)?;
            profile_maxima(&tensors, width).map_err(|source| Error::ProfileFile {
                path: path.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut stats = WorkloadStats::empty(width);
    for partial in &partials {
        stats.merge(partial)?;
    }
    Ok(stats)
}

/// Average-case latency estimate for a profiled workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub variant: Variant,
    pub n: usize,
    pub width: BitWidth,
    pub n_operations: u64,
    pub mean_max: f64,
    pub worst_case: u64,
    /// Latency obtained by plugging the mean per-operation maximum into
    /// the max-magnitude estimator.
    pub latency_at_mean_max: f64,
    /// `worst_case / latency_at_mean_max`.
    pub worst_case_ratio: f64,
    /// Mean over operations of each operation's own max-magnitude estimate.
    pub mean_latency: f64,
    /// `worst_case / mean_latency`.
    pub mean_latency_ratio: f64,
}

pub fn estimate_workload_latency(stats: &WorkloadStats, n: usize, variant: Variant) -> LatencySummary {
    let worst_case = worst_case_latency(n, stats.width, variant);
    let total: u128 = stats
        .histogram
        .iter()
        .enumerate()
        .map(|(value, &count)| u128::from(avg_latency_from_max(value as u64, n, variant)) * u128::from(count))
        .sum();
    let ops = stats.n_operations.max(1) as f64;
    let mean_latency = total as f64 / ops;
    let mean_max = stats.mean_max();
    let latency_at_mean_max = latency_at_magnitude(mean_max, n, variant);
    LatencySummary {
        variant,
        n,
        width: stats.width,
        n_operations: stats.n_operations,
        mean_max,
        worst_case,
        latency_at_mean_max,
        worst_case_ratio: worst_case as f64 / latency_at_mean_max,
        mean_latency,
        mean_latency_ratio: worst_case as f64 / mean_latency,
    }
}

/// One tensor per entry of `maxima`, each with `len` elements drawn
/// uniformly from `[-max, max]` (clipped to the width's range) and one
/// element pinned at magnitude `max`. Deterministic in `seed` (ChaCha8).
pub fn synthetic_corpus(maxima: &[u64], len: usize, width: BitWidth, seed: u64) -> Vec<Tensor> {
    assert!(len > 0, "tensors need at least one element");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    maxima
        .iter()
        .map(|&max| {
            assert!(
                max <= width.max_magnitude(),
                "maximum {max} exceeds the {width}-bit range"
            );
            let max = max as i64;
            let hi = max.min(width.max_value());
            let mut data: Vec<i64> = (0..len).map(|_| rng.random_range(-max..=hi)).collect();
            let pinned = rng.random_range(0..len);
            data[pinned] = if max > width.max_value() || rng.random_bool(0.5) {
                -max
            } else {
                max
            };
            Tensor::new(vec![len], data)
        })
        .collect()
}
