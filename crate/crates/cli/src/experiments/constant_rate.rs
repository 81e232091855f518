//! Constant-rate TCP process: explicit moments and the two couplings.

use pdmp_core::analytics::{constant_rate_atom_lower_bound, constant_rate_moment, constant_rate_tv_bound};
use pdmp_core::couplings::{synchronous_coupling_constant, tv_coupling_constant_rate};
use pdmp_core::montecarlo::{mc_expectation, mc_expectation_multi, replicate, SummaryStats, DEFAULT_MULTIPLIER};
use pdmp_core::{simulate_path, Error, ModelSpec, Result};

use super::{dominated, dominates, horizon, matches, times, Check};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

fn stationary(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new("constant-rate", &["n", "moment"]);
    for n in 1..=config.n {
        let m = constant_rate_moment(config.lambda, config.x, n, f64::INFINITY)?;
        table.push(vec![f64::from(n), m])?;
    }
    let mut r = Report::new(config);
    r.scalars.push(("stationary_mean".into(), table.rows[0][1]));
    r.tables.push(table);
    Ok(r)
}

pub fn constant_rate(config: &ExperimentConfig) -> Result<Report> {
    ModelSpec::tcp_constant(config.lambda)?;
    if config.n == 0 {
        return Err(Error::Usage("moment order n must be at least 1".to_string()));
    }
    if config.t.is_infinite() && config.t > 0.0 {
        return stationary(config);
    }
    let (lambda, x, y, m) = (config.lambda, config.x, config.y, config.replicas);
    let grid = times(config)?;
    let h = horizon(&grid)?;
    let orders: Vec<u32> = (1..=config.n).collect();

    // TV coupling, one run per observation time
    let mut tv = Table::new("constant-rate", &["t", "estimate", "stderr", "bound", "lower_bound"]);
    let (mut tv_stats, mut tv_bounds, mut tv_lower) = (Vec::new(), Vec::new(), Vec::new());
    for &t in grid.iter().filter(|&&t| t > 0.0) {
        let st = mc_expectation(
            m,
            config.seed,
            |rng| tv_coupling_constant_rate(lambda, x, y, t, rng),
            |o| Ok(if o.not_coalesced_by(t) { 1.0 } else { 0.0 }),
        )?;
        let b = constant_rate_tv_bound(lambda, x, y, t);
        let lo = constant_rate_atom_lower_bound(lambda, x, y, t);
        tv.push(vec![t, st.mean, st.stderr, b, lo])?;
        tv_stats.push(st);
        tv_bounds.push(b);
        tv_lower.push(lo);
    }
    let tv_times = tv.column("t").unwrap_or_default();

    // moments of a single path from x
    let model = ModelSpec::tcp_constant(lambda)?;
    let k = orders.len();
    let moment_stats = mc_expectation_multi(
        m,
        config.seed,
        grid.len() * k,
        |rng| simulate_path(&model, x, h, rng),
        |p| {
            let mut v = Vec::with_capacity(grid.len() * k);
            for &t in &grid {
                let z = p.evaluate(t)?;
                v.extend(orders.iter().map(|&n| z.powi(n as i32)));
            }
            Ok(v)
        },
    )?;
    let mut moments = Table::new("moments", &["t", "n", "estimate", "stderr", "exact"]);
    let (mut labels, mut exact) = (Vec::new(), Vec::new());
    for (i, &t) in grid.iter().enumerate() {
        for (j, &n) in orders.iter().enumerate() {
            let st = moment_stats[i * k + j];
            let e = constant_rate_moment(lambda, x, n, t)?;
            moments.push(vec![t, f64::from(n), st.mean, st.stderr, e])?;
            labels.push(format!("t = {t}, n = {n}"));
            exact.push(e);
        }
    }

    // synchronous coupling: path-wise gap law and its mean
    let gap = (x - y).abs();
    let sync = replicate(m, config.seed, |rng| {
        let o = synchronous_coupling_constant(lambda, x, y, h, rng)?;
        grid.iter()
            .map(|&t| {
                let d = o.distance_at(t)?;
                let jumps = o.traj_x.jump_times().partition_point(|&s| s <= t);
                Ok((d, gap * 0.5f64.powi(jumps as i32)))
            })
            .collect::<Result<Vec<(f64, f64)>>>()
    })?;
    let slack = 1e-12 * (1.0 + x + y + h);
    let worst = sync
        .iter()
        .flatten()
        .map(|(d, w)| (d - w).abs())
        .fold(0.0, f64::max);
    let mut sync_table = Table::new("synchronous", &["t", "estimate", "stderr", "exact"]);
    let (mut sync_stats, mut sync_exact, mut sync_labels) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &t) in grid.iter().enumerate() {
        let v: Vec<f64> = sync.iter().map(|r| r[i].0).collect();
        let st = SummaryStats::from_values(&v, DEFAULT_MULTIPLIER)?;
        let e = gap * (-lambda * t / 2.0).exp();
        sync_table.push(vec![t, st.mean, st.stderr, e])?;
        sync_stats.push(st);
        sync_exact.push(e);
        sync_labels.push(format!("t = {t}"));
    }

    let mut r = Report::new(config);
    r.tables.push(tv);
    r.tables.push(moments);
    r.tables.push(sync_table);
    r.scalars.push(("synchronous_max_deviation".into(), worst));
    r.checks.push(matches("moments", &labels, &moment_stats, &exact));
    r.checks.push(Check::new(
        "synchronous_gap_law",
        worst <= slack,
        format!("largest path-wise | |X_t - Y_t| - |x - y| 2^-N_t | is {worst:.3e}"),
    ));
    r.checks.push(matches("synchronous_mean", &sync_labels, &sync_stats, &sync_exact));
    r.checks.push(dominated("tv_bound", &tv_times, &tv_stats, &tv_bounds));
    r.checks.push(dominates("tv_lower_bound", &tv_times, &tv_stats, &tv_lower));
    Ok(r)
}
