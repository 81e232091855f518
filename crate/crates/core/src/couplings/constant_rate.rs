use crate::couplings::{check_duration, check_state, CouplingOutcome, Pair};
use crate::error::Result;
use crate::processes::{poisson_times, ModelSpec};
use crate::rng::RngStream;

/// Both constant-rate paths read one Poisson(`lambda`) clock and halve
/// together, so `|X_t - Y_t| = |x - y| 2^{-N_t}` (up to the rounding of the
/// drift additions).
pub fn synchronous_coupling_constant(
    lambda: f64,
    x: f64,
    y: f64,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<CouplingOutcome> {
    let model = ModelSpec::tcp_constant(lambda)?;
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("horizon", horizon)?;
    let mut pair = Pair::new(model, x, y);
    for t in poisson_times(lambda, 0.0, horizon, rng) {
        pair.x.halve_at(t);
        pair.y.halve_at(t);
    }
    pair.now = horizon;
    Ok(pair.finish(horizon))
}

/// Shared clock up to the penultimate jump before `t`; the two last jump
/// times, each uniform on `(T_{n-1}, t)`, are then maximally coupled so that
/// the paths agree after both have jumped. The match probability is
/// `(1 - g / (t - T_{n-1})) v 0` with `g` the gap at `T_{n-1}`.
pub fn tv_coupling_constant_rate(
    lambda: f64,
    x: f64,
    y: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<CouplingOutcome> {
    let model = ModelSpec::tcp_constant(lambda)?;
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("t", t)?;
    let mut pair = Pair::new(model, x, y);
    let times = poisson_times(lambda, 0.0, t, rng);
    let Some((_, shared)) = times.split_last() else {
        pair.now = t;
        return Ok(pair.finish(t));
    };
    for &s in shared {
        pair.x.halve_at(s);
        pair.y.halve_at(s);
    }
    let start = shared.last().copied().unwrap_or(0.0);
    if pair.merged_at.is_some() {
        let u = rng.uniform_in(start, t);
        pair.x.halve_at(u);
        pair.y.halve_at(u);
        pair.now = t;
        return Ok(pair.finish(t));
    }
    let (a, b) = (pair.x.state_at(start), pair.y.state_at(start));
    let x_hi = a > b;
    let gap = (a - b).abs();
    let len = t - start;
    // Halving at u leaves z/2 + (s - u/2) at later times s, so the paths
    // agree after both jumps iff the larger one jumps `gap` later.
    let (u_lo, u_hi, matched) = if gap < len && rng.uniform() * len < len - gap {
        let u_lo = rng.uniform_in(start, t - gap);
        (u_lo, u_lo + gap, true)
    } else if gap < len {
        (rng.uniform_in(t - gap, t), rng.uniform_in(start, start + gap), false)
    } else {
        (rng.uniform_in(start, t), rng.uniform_in(start, t), false)
    };
    let (hi, lo) = if x_hi {
        (&mut pair.x, &mut pair.y)
    } else {
        (&mut pair.y, &mut pair.x)
    };
    hi.halve_at(u_hi);
    lo.halve_at(u_lo);
    if matched {
        pair.merge(u_hi, x_hi);
    }
    pair.now = t;
    Ok(pair.finish(t))
}
