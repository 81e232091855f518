//! Replication engine and estimators.
//!
//! Replica `i` always draws from `RngStream::new(seed, i)` and per-replica
//! results are reduced in replica order, so every estimate is independent
//! of the number of worker threads.

mod estimators;

pub use estimators::{
    coalescence_fraction, coalescence_fraction_at, empirical_w1, empirical_wp,
    fit_exponential_rate, RateFit,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::rng::RngStream;

/// Multiplier of the standard error used for every bound comparison.
pub const DEFAULT_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub ci_halfwidth: f64,
    pub multiplier: f64,
}

/// Pairwise summation over a fixed split, so the rounding depends only on
/// the order of `values`.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

impl SummaryStats {
    pub fn from_values(values: &[f64], multiplier: f64) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return usage(format!("summary statistics need at least 2 values, got {n}"));
        }
        if !(multiplier.is_finite() && multiplier >= 0.0) {
            return usage(format!("confidence multiplier must be finite and >= 0, got {multiplier}"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "value {} at index {i} is not finite",
                values[i]
            )));
        }
        let mean = pairwise_sum(values) / n as f64;
        let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&squares) / (n - 1) as f64;
        let stderr = (var / n as f64).sqrt();
        Ok(Self {
            n,
            mean,
            stderr,
            ci_halfwidth: multiplier * stderr,
            multiplier,
        })
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_halfwidth
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_halfwidth
    }
}

fn check_replicas(n: usize) -> Result<()> {
    if n < 2 {
        return usage(format!("at least 2 replicas are required, got {n}"));
    }
    Ok(())
}

/// Runs `generator` on streams `0..n` in parallel and returns the results
/// in stream order; the first failing replica (by index) is reported.
pub fn replicate<T, G>(n: usize, seed: u64, generator: G) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..n as u64)
        .into_par_iter()
        .map(|id| generator(&mut RngStream::new(seed, id)))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.in_replica(i)))
        .collect()
}

/// Monte Carlo estimate of `E[functional(sample)]` over `n` replicas.
pub fn mc_expectation<T, G, F>(n: usize, seed: u64, generator: G, functional: F) -> Result<SummaryStats>
where
    G: Fn(&mut RngStream) -> Result<T> + Sync,
    F: Fn(&T) -> Result<f64> + Sync,
{
    let stats = mc_expectation_multi(n, seed, 1, generator, |s: &T| Ok(vec![functional(s)?]))?;
    Ok(stats[0])
}

/// As [`mc_expectation`] for `k` functionals of the same sample, typically
/// one per observation time.
pub fn mc_expectation_multi<T, G, F>(
    n: usize,
    seed: u64,
    k: usize,
    generator: G,
    functional: F,
) -> Result<Vec<SummaryStats>>
where
    G: Fn(&mut RngStream) -> Result<T> + Sync,
    F: Fn(&T) -> Result<Vec<f64>> + Sync,
{
    check_replicas(n)?;
    let rows = replicate(n, seed, |rng| {
        let sample = generator(rng)?;
        functional(&sample)
    })?;
    let mut columns = vec![Vec::with_capacity(n); k];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return usage(format!(
                "replica {i} returned {} values, expected {k}",
                row.len()
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "replica {i} produced the non-finite value {v} for functional {j}"
                )));
            }
            columns[j].push(v);
        }
    }
    columns
        .iter()
        .map(|c| SummaryStats::from_values(c, DEFAULT_MULTIPLIER))
        .collect()
}
