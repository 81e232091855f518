//! Exact simulators of coupled pairs of paths.
//!
//! Every coupling returns both trajectories; each one, taken alone, has the
//! law of the underlying model started from its own initial point.

mod constant_rate;
mod maximal;
mod storage;
mod tcp_coalescence;
mod wasserstein;

pub use constant_rate::{synchronous_coupling_constant, tv_coupling_constant_rate};
pub use maximal::{maximal_coupling_1d, CoupledDraw, DensitySpec, MaximalCoupling};
pub use storage::tv_coupling_storage;
pub use tcp_coalescence::{attempt_coalescence_tcp, hybrid_tv_coupling};
pub use wasserstein::simulate_wasserstein_coupling;

use serde::Serialize;

use crate::error::{usage, Result};
use crate::processes::{sample_tcp_jump_time, ModelSpec, PathBuilder, Trajectory};
use crate::rng::RngStream;

/// The pair `(X_t, Y_t)` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl CoupledState {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) || !(t >= 0.0) {
            return usage(format!(
                "coupled state needs finite x, y >= 0 and t >= 0, got x={x}, y={y}, t={t}"
            ));
        }
        Ok(Self { x, y, t })
    }

    pub fn gap(&self) -> f64 {
        (self.x - self.y).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOutcome {
    pub traj_x: Trajectory,
    pub traj_y: Trajectory,
    pub coalesced: bool,
    /// First time from which both paths agree, when they do.
    pub coalescence_time: Option<f64>,
}

impl CouplingOutcome {
    pub fn state_at(&self, t: f64) -> Result<CoupledState> {
        CoupledState::new(self.traj_x.evaluate(t)?, self.traj_y.evaluate(t)?, t)
    }

    /// `|X_t - Y_t|`.
    pub fn distance_at(&self, t: f64) -> Result<f64> {
        Ok(self.state_at(t)?.gap())
    }

    /// Whether the two paths differ at `t`, i.e. have not merged by `t`.
    pub fn not_coalesced_by(&self, t: f64) -> bool {
        match self.coalescence_time {
            Some(c) => c > t,
            None => true,
        }
    }
}

pub(crate) fn check_state(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        usage(format!("{name} must be finite and nonnegative, got {v}"))
    }
}

pub(crate) fn check_duration(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        usage(format!("{name} must be finite and positive, got {v}"))
    }
}

/// Two path builders advanced in lockstep to a common current time.
///
/// Once merged, `x` drives the shared dynamics and its new jumps are copied
/// onto `y`, so both trajectories evaluate to identical values.
pub(crate) struct Pair {
    pub(crate) x: PathBuilder,
    pub(crate) y: PathBuilder,
    pub(crate) now: f64,
    pub(crate) merged_at: Option<f64>,
}

impl Pair {
    pub(crate) fn new(model: ModelSpec, x: f64, y: f64) -> Self {
        Self {
            x: PathBuilder::new(model, x),
            y: PathBuilder::new(model, y),
            now: 0.0,
            merged_at: (x == y).then_some(0.0),
        }
    }

    pub(crate) fn states(&self) -> (f64, f64) {
        (self.x.state_at(self.now), self.y.state_at(self.now))
    }

    /// Marks the pair as merged at `t`; the path named by `keep_x` holds the
    /// reference value and the other one is resynchronized onto it.
    pub(crate) fn merge(&mut self, t: f64, keep_x: bool) {
        if keep_x {
            let v = self.x.state_at(t);
            self.y.resync_at(t, v);
        } else {
            let v = self.y.state_at(t);
            self.x.resync_at(t, v);
        }
        self.merged_at = Some(t);
    }

    fn advance_shared(&mut self, until: f64, rng: &mut RngStream) {
        let first = self.x.jump_len();
        self.x.advance(self.now, until, rng);
        for i in first..self.x.jump_len() {
            let (t, v) = self.x.jump(i);
            self.y.jump_to(t, v);
        }
        self.now = until;
    }

    /// Runs the Wasserstein coupling of the variable-rate TCP process from
    /// the current time up to `until`.
    pub(crate) fn wasserstein(&mut self, until: f64, rng: &mut RngStream) {
        if self.merged_at.is_some() {
            self.advance_shared(until, rng);
            return;
        }
        loop {
            let (a, b) = self.states();
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            let wait = sample_tcp_jump_time(hi, rng);
            if self.now + wait > until {
                break;
            }
            self.now += wait;
            // Superposition: total rate hi + s, of which lo + s is shared.
            let u = rng.uniform();
            if u * (hi + wait) < lo + wait {
                self.x.halve_at(self.now);
                self.y.halve_at(self.now);
            } else if a >= b {
                self.x.halve_at(self.now);
            } else {
                self.y.halve_at(self.now);
            }
        }
        self.now = until;
    }

    pub(crate) fn finish(self, horizon: f64) -> CouplingOutcome {
        CouplingOutcome {
            traj_x: self.x.finish(horizon),
            traj_y: self.y.finish(horizon),
            coalesced: self.merged_at.is_some(),
            coalescence_time: self.merged_at,
        }
    }
}
