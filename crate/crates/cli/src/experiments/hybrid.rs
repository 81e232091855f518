//! Hybrid total-variation coupling of the variable-rate TCP process.

use nalgebra::{DMatrix, DVector};

use pdmp_core::analytics::{
    coalescence_bound_q, lambda_half_closed_form, plan_tv_schedule, tcp_atom_lower_bound,
    tv_bound_hybrid,
};
use pdmp_core::couplings::{attempt_coalescence_tcp, hybrid_tv_coupling};
use pdmp_core::montecarlo::fit_exponential_rate;
use pdmp_core::montecarlo::mc_expectation;
use pdmp_core::{Error, Result};

use super::{dominated, dominates, near, times, Check};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

/// Least squares fit of `ln D(t) = a + ln(1 + t) + b sqrt(t) - r t`, the
/// shape of the bound as a function of the total time; returns `r`.
fn bound_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 || points.iter().any(|&(_, d)| !(d > 0.0)) {
        return Err(Error::Numerical(
            "the bound-exponent fit needs 3 horizons with a positive bound".to_string(),
        ));
    }
    let a = DMatrix::from_fn(points.len(), 3, |i, j| {
        let t = points[i].0;
        [1.0, t.sqrt(), -t][j]
    });
    let b = DVector::from_iterator(
        points.len(),
        points.iter().map(|&(t, d)| d.ln() - t.ln_1p()),
    );
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("bound-exponent fit: {e}")))?;
    Ok(sol[2])
}

pub fn tv_hybrid(config: &ExperimentConfig) -> Result<Report> {
    if config.rounds == 0 {
        return Err(Error::Usage("rounds must be at least 1".to_string()));
    }
    let grid = times(config)?;
    let rounds = f64::from(config.rounds);
    let mut main = Table::new(
        "tv-hybrid",
        &["t", "estimate", "stderr", "bound", "lower_bound", "raw_bound"],
    );
    let mut schedule = Table::new("schedule", &["t", "epsilon", "t1", "t2", "x0"]);
    let (mut stats, mut bounds, mut lower) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &grid {
        let s = plan_tv_schedule(t, config.t0)?;
        let bound = tv_bound_hybrid(&s);
        // later rounds only add chances to merge, so the one-round bound
        // still applies at the end of the last round
        let end = rounds * s.total();
        let st = mc_expectation(
            config.replicas,
            config.seed,
            |rng| hybrid_tv_coupling(config.x, config.y, s.t1, s.t2, config.rounds, rng),
            |o| Ok(if o.not_coalesced_by(end) { 1.0 } else { 0.0 }),
        )?;
        let lo = tcp_atom_lower_bound(config.x, config.y, end);
        main.push(vec![t, st.mean, st.stderr, bound.value, lo, bound.raw_value])?;
        schedule.push(vec![t, s.epsilon, s.t1, s.t2, s.x0_cut])?;
        stats.push(st);
        bounds.push(bound.value);
        lower.push(lo);
    }

    let mut fit_table = Table::new("bound-fit", &["t", "raw_bound"]);
    let mut fit_points = Vec::new();
    for t in config.fit_times.points() {
        let raw = tv_bound_hybrid(&plan_tv_schedule(t, config.t0)?).raw_value;
        fit_table.push(vec![t, raw])?;
        fit_points.push((t, raw));
    }
    let rate = bound_exponent(&fit_points)?;
    let lo_t = fit_points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi_t = fit_points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let loglinear = fit_exponential_rate(&fit_points, (lo_t, hi_t))?;

    let (xa, ya, window) = (1.0 + config.eps, 1.0, config.t);
    let q = coalescence_bound_q(xa, ya, window, config.eps, xa)?;
    let attempt = mc_expectation(
        config.replicas,
        config.seed,
        |rng| attempt_coalescence_tcp(xa, ya, window, rng),
        |o| Ok(if o.coalesced { 1.0 } else { 0.0 }),
    )?;
    let mut attempt_table = Table::new(
        "attempt",
        &["eps", "t", "estimate", "stderr", "lower_bound", "explicit"],
    );
    attempt_table.push(vec![
        config.eps,
        window,
        attempt.mean,
        attempt.stderr,
        q.quadrature,
        q.explicit,
    ])?;

    let target = 2.0 * lambda_half_closed_form() / 3.0;
    let mut r = Report::new(config);
    r.tables.push(main);
    r.tables.push(schedule);
    r.tables.push(fit_table);
    r.tables.push(attempt_table);
    r.scalars.push(("bound_rate".into(), rate));
    r.scalars.push(("bound_rate_target".into(), target));
    r.scalars.push(("bound_loglinear_slope".into(), loglinear.slope));
    r.checks.push(dominated("bound_dominance", &grid, &stats, &bounds));
    r.checks.push(dominates("atom_lower_bound", &grid, &stats, &lower));
    r.checks.push(near("bound_rate", rate, target, 0.01));
    r.checks.push(Check::new(
        "attempt_lower_bound",
        attempt.upper() >= q.quadrature,
        format!(
            "success {:.4} +/- {:.4} vs q = {:.4}",
            attempt.mean, attempt.ci_halfwidth, q.quadrature
        ),
    ));
    Ok(r)
}
