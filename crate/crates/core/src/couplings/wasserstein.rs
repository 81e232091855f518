use crate::couplings::{check_duration, check_state, CouplingOutcome, Pair};
use crate::error::Result;
use crate::processes::ModelSpec;
use crate::rng::RngStream;

/// Coupling of two variable-rate TCP paths in which the lower coordinate
/// never jumps alone.
///
/// Events occur at total rate `(x v y) + s`; an event halves both
/// coordinates with probability `((x ^ y) + s) / ((x v y) + s)` and only the
/// larger one otherwise. The gap is constant between events, halves at
/// simultaneous jumps, and two distinct paths never merge.
pub fn simulate_wasserstein_coupling(
    x: f64,
    y: f64,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<CouplingOutcome> {
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("horizon", horizon)?;
    let mut pair = Pair::new(ModelSpec::TcpVariable, x, y);
    pair.wasserstein(horizon, rng);
    Ok(pair.finish(horizon))
}
