//! Experiments on the variable-rate TCP process.

use rayon::prelude::*;

use pdmp_core::analytics::{
    contraction_constants, invariant_density, invariant_mean_bracket, lambda_half_closed_form,
    optimal_p as best_exponent, sqrt_contraction_bound,
};
use pdmp_core::couplings::simulate_wasserstein_coupling;
use pdmp_core::montecarlo::{empirical_w1, fit_exponential_rate};
use pdmp_core::montecarlo::{mc_expectation_multi, replicate, SummaryStats, DEFAULT_MULTIPLIER};
use pdmp_core::quadrature::integrate;
use pdmp_core::{simulate_path, Error, ModelSpec, Result};

use super::{dominated, horizon, near, times};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

/// Salt separating the second sample's seed from the first.
const SECOND_SAMPLE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// `E|X_t - Y_t|^{1/2}` and `E|X_t - Y_t|` under the Wasserstein coupling,
/// one pair of statistics per grid time.
fn coupling_moments(config: &ExperimentConfig) -> Result<(Vec<f64>, Vec<SummaryStats>, Vec<SummaryStats>)> {
    let t = times(config)?;
    let h = horizon(&t)?;
    let k = t.len();
    let stats = mc_expectation_multi(
        config.replicas,
        config.seed,
        2 * k,
        |rng| simulate_wasserstein_coupling(config.x, config.y, h, rng),
        |out| {
            let mut v = Vec::with_capacity(2 * k);
            for &s in &t {
                v.push(out.distance_at(s)?.sqrt());
            }
            for &s in &t {
                v.push(out.distance_at(s)?);
            }
            Ok(v)
        },
    )?;
    let first = stats[k..].to_vec();
    let mut sqrt = stats;
    sqrt.truncate(k);
    Ok((t, sqrt, first))
}

fn points(t: &[f64], stats: &[SummaryStats]) -> Vec<(f64, f64)> {
    t.iter().zip(stats).map(|(&t, s)| (t, s.mean)).collect()
}

fn sqrt_table(name: &str, t: &[f64], stats: &[SummaryStats], x: f64, y: f64) -> Result<(Table, Vec<f64>)> {
    let mut table = Table::new(name, &["t", "estimate", "stderr", "bound"]);
    let mut bounds = Vec::with_capacity(t.len());
    for (&s, st) in t.iter().zip(stats) {
        let b = sqrt_contraction_bound(s, x, y);
        bounds.push(b);
        table.push(vec![s, st.mean, st.stderr, b])?;
    }
    Ok((table, bounds))
}

pub fn fig2(config: &ExperimentConfig) -> Result<Report> {
    let (t, sqrt, _) = coupling_moments(config)?;
    let (table, bounds) = sqrt_table("fig2", &t, &sqrt, config.x, config.y)?;
    let fit = fit_exponential_rate(&points(&t, &sqrt), config.window)?;
    let mut r = Report::new(config);
    r.tables.push(table);
    r.scalars.push(("slope".into(), fit.slope));
    r.scalars.push(("slope_stderr".into(), fit.slope_stderr));
    r.checks.push(dominated("bound_dominance", &t, &sqrt, &bounds));
    r.checks.push(near("sqrt_moment_slope", fit.slope, -0.4, 0.1));
    Ok(r)
}

pub fn rate_coupling(config: &ExperimentConfig) -> Result<Report> {
    let (t, sqrt, first) = coupling_moments(config)?;
    let mut main = Table::new("rate-coupling", &["t", "estimate", "stderr"]);
    for (&s, st) in t.iter().zip(&first) {
        main.push(vec![s, st.mean, st.stderr])?;
    }
    let (sqrt_tab, _) = sqrt_table("sqrt", &t, &sqrt, config.x, config.y)?;
    let fit_first = fit_exponential_rate(&points(&t, &first), config.window)?;
    let fit_sqrt = fit_exponential_rate(&points(&t, &sqrt), config.window)?;
    let mut r = Report::new(config);
    r.tables.push(main);
    r.tables.push(sqrt_tab);
    r.scalars.push(("slope_first".into(), fit_first.slope));
    r.scalars.push(("slope_first_stderr".into(), fit_first.slope_stderr));
    r.scalars.push(("slope_sqrt".into(), fit_sqrt.slope));
    r.scalars.push(("slope_sqrt_stderr".into(), fit_sqrt.slope_stderr));
    r.checks.push(near("first_moment_slope", fit_first.slope, -0.48, 0.12));
    r.checks.push(near("sqrt_moment_slope", fit_sqrt.slope, -0.4, 0.1));
    Ok(r)
}

/// Values at the grid times of `n` independent paths from `x0`, one column
/// per time.
fn marginal_columns(x0: f64, t: &[f64], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let model = ModelSpec::tcp_variable();
    let h = horizon(t)?;
    let rows = replicate(n, seed, |rng| {
        let path = simulate_path(&model, x0, h, rng)?;
        t.iter().map(|&s| path.evaluate(s)).collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..t.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect())
}

pub fn w1_true(config: &ExperimentConfig) -> Result<Report> {
    let t = times(config)?;
    let m = config.replicas;
    let from_x = marginal_columns(config.x, &t, m, config.seed)?;
    let from_y = marginal_columns(config.y, &t, m, config.seed ^ SECOND_SAMPLE_SALT)?;
    let mut table = Table::new("w1-true", &["t", "estimate"]);
    let mut pts = Vec::with_capacity(t.len());
    for (j, &s) in t.iter().enumerate() {
        let w = empirical_w1(&from_x[j], &from_y[j])?;
        table.push(vec![s, w])?;
        pts.push((s, w));
    }
    let fit = fit_exponential_rate(&pts, config.window)?;
    let mut r = Report::new(config);
    r.tables.push(table);
    r.scalars.push(("slope".into(), fit.slope));
    r.scalars.push(("slope_stderr".into(), fit.slope_stderr));
    r.scalars.push(("points".into(), fit.n_points as f64));
    r.checks.push(near("w1_slope", fit.slope, -1.67, 0.25));
    Ok(r)
}

pub fn optimal_p(config: &ExperimentConfig) -> Result<Report> {
    let grid = config.grid.points();
    let rows = grid
        .par_iter()
        .map(|&p| contraction_constants(p))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("optimal-p", &["p", "m", "lambda", "alpha", "x0", "u_star"]);
    for c in &rows {
        table.push(vec![c.p, c.m, c.lambda, c.alpha, c.x0, c.u_star])?;
    }
    let best = best_exponent(&rows).ok_or_else(|| Error::Usage("empty exponent grid".into()))?;
    let mut r = Report::new(config);
    r.tables.push(table);
    r.scalars.push(("best_p".into(), best.p));
    r.scalars.push(("best_lambda".into(), best.lambda));
    r.checks.push(near("max_lambda", best.lambda, 0.1326, 0.001));
    r.checks.push(near("argmax_p", best.p, 2.0 / 3.0, 0.02));
    if let Some(half) = rows.iter().find(|c| (c.p - 0.5).abs() < 1e-9) {
        r.checks.push(near("lambda_half", half.lambda, lambda_half_closed_form(), 1e-9));
    }
    Ok(r)
}

const DENSITY_TOL: f64 = 1e-14;
const QUAD_TOL: f64 = 1e-12;
const HIST_WIDTH: f64 = 0.1;
const HIST_BINS: usize = 40;

fn invariant_moment(p: i32) -> Result<f64> {
    integrate(|x| x.powi(p) * invariant_density(x, DENSITY_TOL), 0.0, f64::INFINITY, QUAD_TOL)
}

pub fn invariant_check(config: &ExperimentConfig) -> Result<Report> {
    if !(config.t > 0.0 && config.t.is_finite()) {
        return Err(Error::Usage(format!(
            "invariant-check needs a finite t > 0, got {}",
            config.t
        )));
    }
    let mass = invariant_moment(0)?;
    let m1 = invariant_moment(1)?;
    let m2 = invariant_moment(2)?;
    let m4 = invariant_moment(4)?;
    let m_inv = invariant_moment(-1)?;
    let ln2 = std::f64::consts::LN_2;

    let model = ModelSpec::tcp_variable();
    let sample = replicate(config.replicas, config.seed, |rng| {
        simulate_path(&model, config.x, config.t, rng)?.evaluate(config.t)
    })?;
    let mean = SummaryStats::from_values(&sample, DEFAULT_MULTIPLIER)?;
    let paired: Vec<f64> = sample.iter().map(|&v| ln2 * v - 1.0 / v).collect();
    let identity = SummaryStats::from_values(&paired, 4.0)?;

    let n = sample.len() as f64;
    let mut hist = Table::new("invariant-check", &["x", "estimate", "stderr", "density"]);
    let mut counts = [0usize; HIST_BINS];
    for &v in &sample {
        let b = (v / HIST_WIDTH).floor();
        if b >= 0.0 && (b as usize) < HIST_BINS {
            counts[b as usize] += 1;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let centre = (i as f64 + 0.5) * HIST_WIDTH;
        let p = c as f64 / n;
        hist.push(vec![
            centre,
            p / HIST_WIDTH,
            (p * (1.0 - p) / n).sqrt() / HIST_WIDTH,
            invariant_density(centre, DENSITY_TOL),
        ])?;
    }
    let mut moments = Table::new("moments", &["order", "quadrature", "expected"]);
    moments.push(vec![0.0, mass, 1.0])?;
    moments.push(vec![-1.0, m_inv, ln2 * m1])?;
    moments.push(vec![2.0, m2, 2.0])?;
    moments.push(vec![4.0, m4, 48.0 / 7.0])?;

    let (lo, hi) = invariant_mean_bracket();
    let mut r = Report::new(config);
    r.tables.push(hist);
    r.tables.push(moments);
    r.scalars.push(("quadrature_mean".into(), m1));
    r.scalars.push(("sample_mean".into(), mean.mean));
    r.scalars.push(("sample_mean_stderr".into(), mean.stderr));
    r.scalars.push(("log2_identity_mean".into(), identity.mean));
    r.scalars.push(("log2_identity_stderr".into(), identity.stderr));
    r.checks.push(near("normalization", mass, 1.0, 1e-8));
    r.checks.push(near("second_moment", m2, 2.0, 1e-6));
    r.checks.push(near("fourth_moment", m4, 48.0 / 7.0, 1e-6));
    r.checks.push(super::Check::new(
        "sample_mean_bracket",
        mean.upper() >= lo && mean.lower() <= hi,
        format!(
            "{:.5} +/- {:.5} vs [{lo:.4}, {hi:.4}]",
            mean.mean, mean.ci_halfwidth
        ),
    ));
    r.checks.push(super::Check::new(
        "log2_identity",
        identity.mean.abs() <= identity.ci_halfwidth,
        format!(
            "mean of ln2 X - 1/X is {:.5} with 4 stderr = {:.5}",
            identity.mean, identity.ci_halfwidth
        ),
    ));
    Ok(r)
}
