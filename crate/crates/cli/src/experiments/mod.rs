//! One function per experiment; each returns a [`Report`] with its tables,
//! fitted scalars and acceptance checks.

mod constant_rate;
mod hybrid;
mod storage;
mod tcp;

use pdmp_core::montecarlo::SummaryStats;
use pdmp_core::{Error, Result};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{Check, Report};

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    if config.replicas < 2 {
        return Err(Error::Usage(format!(
            "replicas must be at least 2, got {}",
            config.replicas
        )));
    }
    match config.experiment {
        Experiment::Fig2 => tcp::fig2(config),
        Experiment::RateCoupling => tcp::rate_coupling(config),
        Experiment::W1True => tcp::w1_true(config),
        Experiment::OptimalP => tcp::optimal_p(config),
        Experiment::InvariantCheck => tcp::invariant_check(config),
        Experiment::TvHybrid => hybrid::tv_hybrid(config),
        Experiment::ConstantRate => constant_rate::constant_rate(config),
        Experiment::Storage => storage::storage(config),
    }
}

/// Observation times of the grid, checked to be nonnegative and finite.
fn times(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let t = config.grid.points();
    if t.is_empty() || t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Usage(format!(
            "grid {} must hold finite nonnegative times",
            config.grid
        )));
    }
    Ok(t)
}

fn horizon(times: &[f64]) -> Result<f64> {
    let h = times.iter().copied().fold(0.0, f64::max);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(Error::Usage("the time grid needs a positive time".to_string()))
    }
}

/// `|value - target| <= tol`.
fn near(name: &str, value: f64, target: f64, tol: f64) -> Check {
    Check::new(
        name,
        (value - target).abs() <= tol,
        format!("{value} vs {target} +/- {tol}"),
    )
}

/// Every estimate lies below its bound plus its confidence halfwidth.
fn dominated(name: &str, times: &[f64], stats: &[SummaryStats], bounds: &[f64]) -> Check {
    let worst = times
        .iter()
        .zip(stats)
        .zip(bounds)
        .map(|((&t, s), &b)| (t, s.lower() - b))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match worst {
        Some((t, excess)) => Check::new(
            name,
            excess <= 0.0,
            format!("largest (estimate - 3 stderr) - bound is {excess:.4e} at t = {t}"),
        ),
        None => Check::new(name, true, "no points".to_string()),
    }
}

/// Every estimate lies above its lower bound minus its confidence halfwidth.
fn dominates(name: &str, times: &[f64], stats: &[SummaryStats], lower: &[f64]) -> Check {
    let worst = times
        .iter()
        .zip(stats)
        .zip(lower)
        .map(|((&t, s), &b)| (t, b - s.upper()))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match worst {
        Some((t, deficit)) => Check::new(
            name,
            deficit <= 0.0,
            format!("largest lower bound - (estimate + 3 stderr) is {deficit:.4e} at t = {t}"),
        ),
        None => Check::new(name, true, "no points".to_string()),
    }
}

/// Every estimate is within its confidence halfwidth of the exact value
/// (plus rounding slack, for deterministic points such as `t = 0`).
fn matches(name: &str, labels: &[String], stats: &[SummaryStats], exact: &[f64]) -> Check {
    let worst = labels
        .iter()
        .zip(stats)
        .zip(exact)
        .map(|((l, s), &e)| (l, (s.mean - e).abs() - s.ci_halfwidth - 1e-12 * (1.0 + e.abs())))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match worst {
        Some((l, excess)) => Check::new(
            name,
            excess <= 0.0,
            format!("largest |estimate - exact| - 3 stderr is {excess:.4e} at {l}"),
        ),
        None => Check::new(name, true, "no points".to_string()),
    }
}
