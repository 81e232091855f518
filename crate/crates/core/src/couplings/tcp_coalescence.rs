//! Coalescent coupling of the variable-rate TCP process.
//!
//! With `x > y` and `delta = x - y`, the first jump time `T` of `X` is
//! maximally coupled with `S = T^Y + delta` on `[delta, t]`. On a match `Y`
//! jumps at `T - delta` to `(x + T)/2 - delta`; if it does not jump again
//! during the next `delta` time units it reaches `(x + T)/2` exactly when `X`
//! jumps there, and the two paths merge.

use crate::couplings::maximal::{DensitySpec, MaximalCoupling};
use crate::couplings::{check_duration, check_state, CouplingOutcome, Pair};
use crate::error::{usage, Result};
use crate::processes::{sample_tcp_jump_time, ModelSpec, PathBuilder};
use crate::rng::RngStream;

fn split(pair: &mut Pair, x_hi: bool) -> (&mut PathBuilder, &mut PathBuilder) {
    if x_hi {
        (&mut pair.x, &mut pair.y)
    } else {
        (&mut pair.y, &mut pair.x)
    }
}

/// One coalescence attempt over `(now, now + window]`, with the gap at most
/// `window`. On failure the pair is continued, after both first jumps, by
/// the Wasserstein coupling. Returns whether the paths merged.
pub(crate) fn attempt(pair: &mut Pair, window: f64, rng: &mut RngStream) -> Result<bool> {
    let start = pair.now;
    let end = start + window;
    let (a, b) = pair.states();
    let x_hi = a >= b;
    let (hi_v, lo_v) = if x_hi { (a, b) } else { (b, a) };
    let delta = hi_v - lo_v;
    if delta == 0.0 {
        pair.merge(start, true);
        pair.wasserstein(end, rng);
        return Ok(true);
    }
    let coupling = MaximalCoupling::new(
        DensitySpec::tcp_jump_time(hi_v)?,
        DensitySpec::tcp_jump_time(lo_v)?.shifted(delta)?,
        (delta, window),
    )?;
    let draw = coupling.sample(rng)?;
    let t_hi = start + draw.first;
    let t_lo = start + (draw.second - delta);

    if draw.matched {
        let (hi, lo) = split(pair, x_hi);
        let v = lo.halve_at(t_lo);
        let tau = sample_tcp_jump_time(v, rng);
        if tau > delta {
            hi.halve_at(t_hi);
            pair.now = t_hi;
            pair.merge(t_hi, x_hi);
            pair.wasserstein(end, rng);
            return Ok(true);
        }
        lo.halve_at(t_lo + tau);
        lo.advance(t_lo + tau, t_hi, rng);
        hi.halve_at(t_hi);
        pair.now = t_hi;
        pair.wasserstein(end, rng);
        return Ok(false);
    }

    // Unmatched: the earlier jumper runs alone until the other's jump.
    let hi_first = t_hi <= t_lo;
    let (t_first, t_second) = if hi_first { (t_hi, t_lo) } else { (t_lo, t_hi) };
    if t_first > end {
        pair.now = end;
        return Ok(false);
    }
    let (hi, lo) = split(pair, x_hi);
    let (first, second) = if hi_first { (hi, lo) } else { (lo, hi) };
    first.halve_at(t_first);
    first.advance(t_first, t_second.min(end), rng);
    if t_second <= end {
        second.halve_at(t_second);
        pair.now = t_second;
        pair.wasserstein(end, rng);
    } else {
        pair.now = end;
    }
    Ok(false)
}

/// A single coalescence attempt over `[0, t]` from `(x, y)`; requires
/// `t >= |x - y|`. Equal starts coalesce at time 0.
pub fn attempt_coalescence_tcp(x: f64, y: f64, t: f64, rng: &mut RngStream) -> Result<CouplingOutcome> {
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("window", t)?;
    if (x - y).abs() > t {
        return usage(format!(
            "coalescence attempt needs t >= |x - y|, got t={t}, |x - y|={}",
            (x - y).abs()
        ));
    }
    let mut pair = Pair::new(ModelSpec::TcpVariable, x, y);
    if pair.merged_at.is_none() {
        attempt(&mut pair, t, rng)?;
    } else {
        pair.wasserstein(t, rng);
    }
    Ok(pair.finish(t))
}

/// Up to `rounds` cycles of a Wasserstein phase of length `t1` followed by a
/// coalescence attempt over `t2`, stopping at the first success. The horizon
/// is `rounds * (t1 + t2)`; a round whose gap exceeds `t2` after the first
/// phase runs the Wasserstein coupling instead of the attempt.
pub fn hybrid_tv_coupling(
    x: f64,
    y: f64,
    t1: f64,
    t2: f64,
    rounds: u32,
    rng: &mut RngStream,
) -> Result<CouplingOutcome> {
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("t1", t1)?;
    check_duration("t2", t2)?;
    if rounds == 0 {
        return usage("rounds must be at least 1".to_string());
    }
    let cycle = t1 + t2;
    let horizon = rounds as f64 * cycle;
    let mut pair = Pair::new(ModelSpec::TcpVariable, x, y);
    for r in 0..rounds {
        if pair.merged_at.is_some() {
            break;
        }
        let base = r as f64 * cycle;
        pair.wasserstein(base + t1, rng);
        let (a, b) = pair.states();
        let gap = (a - b).abs();
        if gap > t2 {
            pair.wasserstein(base + cycle, rng);
        } else {
            attempt(&mut pair, t2, rng)?;
        }
    }
    pair.wasserstein(horizon, rng);
    Ok(pair.finish(horizon))
}
