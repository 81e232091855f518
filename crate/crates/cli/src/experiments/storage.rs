//! Storage model: mean, total-variation coupling and rate comparison.

use pdmp_core::analytics::storage_tv_bound;
use pdmp_core::couplings::tv_coupling_storage;
use pdmp_core::montecarlo::{mc_expectation, mc_expectation_multi};
use pdmp_core::{simulate_path, ModelSpec, Result};

use super::{dominated, dominates, horizon, matches, times};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

/// Rate once quoted for this example through a general drift and minorization
/// argument.
const CITED_RATE: f64 = 0.05;

pub fn storage(config: &ExperimentConfig) -> Result<Report> {
    let (alpha, beta, x, y, m) = (config.alpha, config.beta, config.x, config.y, config.replicas);
    let model = ModelSpec::storage(alpha, beta)?;
    ModelSpec::storage(alpha, alpha)?;
    let grid = times(config)?;
    let h = horizon(&grid)?;

    let mean_stats = mc_expectation_multi(
        m,
        config.seed,
        grid.len(),
        |rng| simulate_path(&model, x, h, rng),
        |p| grid.iter().map(|&t| p.evaluate(t)).collect(),
    )?;
    let mut mean = Table::new("mean", &["t", "estimate", "stderr", "exact"]);
    let (mut labels, mut exact) = (Vec::new(), Vec::new());
    let ratio = alpha / beta;
    for (&t, st) in grid.iter().zip(&mean_stats) {
        let e = ratio + (x - ratio) * (-beta * t).exp();
        mean.push(vec![t, st.mean, st.stderr, e])?;
        labels.push(format!("t = {t}"));
        exact.push(e);
    }

    let mut tv = Table::new(
        "storage",
        &["t", "alpha", "beta", "estimate", "stderr", "bound", "lower_bound"],
    );
    let mut rates = Table::new("rates", &["alpha", "beta", "achievable_rate", "cited_rate", "factor"]);
    let mut checks = Vec::new();
    for (a, b, tag) in [(alpha, beta, "configured"), (alpha, alpha, "equal_rates")] {
        let times: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
        let (mut stats, mut bounds, mut lower) = (Vec::new(), Vec::new(), Vec::new());
        for &t in &times {
            let st = mc_expectation(
                m,
                config.seed,
                |rng| tv_coupling_storage(a, b, x, y, t, rng),
                |o| Ok(if o.not_coalesced_by(t) { 1.0 } else { 0.0 }),
            )?;
            let bound = storage_tv_bound(a, b, x, y, t);
            let lo = if x == y { 0.0 } else { (-a * t).exp() };
            tv.push(vec![t, a, b, st.mean, st.stderr, bound, lo])?;
            stats.push(st);
            bounds.push(bound);
            lower.push(lo);
        }
        checks.push(dominated(&format!("tv_bound_{tag}"), &times, &stats, &bounds));
        checks.push(dominates(&format!("tv_lower_bound_{tag}"), &times, &stats, &lower));
        let achievable = a.min(b);
        rates.push(vec![a, b, achievable, CITED_RATE, achievable / CITED_RATE])?;
    }

    let mut r = Report::new(config);
    r.tables.push(tv);
    r.tables.push(mean);
    r.tables.push(rates);
    r.scalars.push(("rate_factor".into(), alpha.min(beta) / CITED_RATE));
    r.checks.push(matches("mean", &labels, &mean_stats, &exact));
    r.checks.extend(checks);
    Ok(r)
}
