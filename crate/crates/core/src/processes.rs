//! Exact event-driven samplers for the three piecewise deterministic models.
//!
//! * `TcpVariable`: unit drift, jump rate equal to the current state, jumps
//!   halve the state. From state `x` the waiting time to the next jump has
//!   survival `exp(-t^2/2 - x t)` and is drawn as `sqrt(x^2 + 2E) - x`.
//! * `TcpConstant`: unit drift, jumps at the times of a Poisson process of
//!   rate `lambda`, jumps halve the state.
//! * `Storage`: exponential decay at rate `beta`, jumps at Poisson(`alpha`)
//!   times adding an independent unit-mean exponential mark.
//!
//! Paths are stored as jump-time skeletons and evaluated through the flow,
//! so no time discretization is ever involved.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TcpVariable,
    TcpConstant,
    Storage,
}

/// One of the three models together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    TcpVariable,
    TcpConstant { lambda: f64 },
    Storage { alpha: f64, beta: f64 },
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        usage(format!("{name} must be finite and strictly positive, got {v}"))
    }
}

impl ModelSpec {
    pub fn tcp_variable() -> Self {
        ModelSpec::TcpVariable
    }

    pub fn tcp_constant(lambda: f64) -> Result<Self> {
        check_rate("lambda", lambda)?;
        Ok(ModelSpec::TcpConstant { lambda })
    }

    pub fn storage(alpha: f64, beta: f64) -> Result<Self> {
        check_rate("alpha", alpha)?;
        check_rate("beta", beta)?;
        Ok(ModelSpec::Storage { alpha, beta })
    }

    /// Re-checks the rate invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::TcpVariable => Ok(()),
            ModelSpec::TcpConstant { lambda } => check_rate("lambda", lambda),
            ModelSpec::Storage { alpha, beta } => {
                check_rate("alpha", alpha)?;
                check_rate("beta", beta)
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::TcpVariable => ModelKind::TcpVariable,
            ModelSpec::TcpConstant { .. } => ModelKind::TcpConstant,
            ModelSpec::Storage { .. } => ModelKind::Storage,
        }
    }

    pub fn is_tcp(&self) -> bool {
        !matches!(self, ModelSpec::Storage { .. })
    }

    /// Deterministic motion between jumps: state after `s` time units from `x`.
    pub fn flow(&self, x: f64, s: f64) -> f64 {
        match *self {
            ModelSpec::TcpVariable | ModelSpec::TcpConstant { .. } => x + s,
            ModelSpec::Storage { beta, .. } => x * (-beta * s).exp(),
        }
    }
}

/// See [`ModelSpec::flow`].
pub fn flow(model: &ModelSpec, x: f64, s: f64) -> f64 {
    model.flow(x, s)
}

/// Waiting time to the next jump of the variable-rate TCP process from `x`,
/// given the unit exponential draw `e`.
///
/// Computes `sqrt(x^2 + 2e) - x` in the cancellation-free form
/// `2e / (sqrt(x^2 + 2e) + x)`.
pub fn tcp_jump_time_from_exp(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 0.0;
    }
    2.0 * e / ((x * x + 2.0 * e).sqrt() + x)
}

pub fn sample_tcp_jump_time(x: f64, rng: &mut RngStream) -> f64 {
    tcp_jump_time_from_exp(x, rng.exp1())
}

/// `P_x(T_1 > t) = exp(-t^2/2 - x t)` for the variable-rate TCP process.
pub fn tcp_survival(x: f64, t: f64) -> f64 {
    (-0.5 * t * t - x * t).exp()
}

/// Jump-time skeleton of one path on `[0, horizon]`.
///
/// Besides jumps, a trajectory may carry one resynchronization knot: a time
/// at which the stored state is replaced by a value equal to the flowed state
/// up to rounding. Couplings use it so that two merged paths evaluate to
/// bit-identical values after the merge.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    model: ModelSpec,
    x0: f64,
    horizon: f64,
    jump_times: Vec<f64>,
    post_jump_values: Vec<f64>,
    resync: Option<(f64, f64)>,
}

impl Trajectory {
    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn post_jump_values(&self) -> &[f64] {
        &self.post_jump_values
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    pub fn resync_knot(&self) -> Option<(f64, f64)> {
        self.resync
    }

    /// Last knot (time, value) at or before `t`.
    fn anchor(&self, t: f64) -> (f64, f64) {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        let mut anchor = if idx == 0 {
            (0.0, self.x0)
        } else {
            (self.jump_times[idx - 1], self.post_jump_values[idx - 1])
        };
        if let Some((rt, rv)) = self.resync {
            if rt <= t && rt >= anchor.0 {
                anchor = (rt, rv);
            }
        }
        anchor
    }

    /// State at time `t`. A jump exactly at `t` is included (post-jump value).
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return usage(format!(
                "evaluation time {t} outside [0, {}]",
                self.horizon
            ));
        }
        let (at, av) = self.anchor(t);
        Ok(self.model.flow(av, t - at))
    }

    /// State just before the `i`-th jump.
    pub fn pre_jump_value(&self, i: usize) -> f64 {
        let t = self.jump_times[i];
        let (mut at, mut av) = if i == 0 {
            (0.0, self.x0)
        } else {
            (self.jump_times[i - 1], self.post_jump_values[i - 1])
        };
        if let Some((rt, rv)) = self.resync {
            if rt < t && rt >= at {
                at = rt;
                av = rv;
            }
        }
        self.model.flow(av, t - at)
    }
}

/// Incremental construction of a trajectory, shared by the path sampler and
/// the coupling simulators.
#[derive(Debug, Clone)]
pub(crate) struct PathBuilder {
    model: ModelSpec,
    x0: f64,
    anchor_time: f64,
    anchor_value: f64,
    jump_times: Vec<f64>,
    post_jump_values: Vec<f64>,
    resync: Option<(f64, f64)>,
}

impl PathBuilder {
    pub(crate) fn new(model: ModelSpec, x0: f64) -> Self {
        Self {
            model,
            x0,
            anchor_time: 0.0,
            anchor_value: x0,
            jump_times: Vec::new(),
            post_jump_values: Vec::new(),
            resync: None,
        }
    }

    pub(crate) fn state_at(&self, t: f64) -> f64 {
        debug_assert!(t >= self.anchor_time);
        self.model.flow(self.anchor_value, t - self.anchor_time)
    }

    pub(crate) fn jump_len(&self) -> usize {
        self.jump_times.len()
    }

    pub(crate) fn jump(&self, i: usize) -> (f64, f64) {
        (self.jump_times[i], self.post_jump_values[i])
    }

    /// Records a jump at `t` to `value`.
    pub(crate) fn jump_to(&mut self, t: f64, value: f64) {
        debug_assert!(t >= self.anchor_time);
        self.jump_times.push(t);
        self.post_jump_values.push(value);
        self.anchor_time = t;
        self.anchor_value = value;
    }

    /// Halving jump at `t`; returns the post-jump value.
    pub(crate) fn halve_at(&mut self, t: f64) -> f64 {
        let v = 0.5 * self.state_at(t);
        self.jump_to(t, v);
        v
    }

    pub(crate) fn resync_at(&mut self, t: f64, value: f64) {
        debug_assert!(self.resync.is_none());
        self.resync = Some((t, value));
        self.anchor_time = t;
        self.anchor_value = value;
    }

    /// Runs the single-path dynamics from `from` up to `until`, drawing all
    /// jumps independently of any other path.
    pub(crate) fn advance(&mut self, from: f64, until: f64, rng: &mut RngStream) {
        let mut now = from;
        match self.model {
            ModelSpec::TcpVariable => loop {
                let wait = sample_tcp_jump_time(self.state_at(now), rng);
                if now + wait > until {
                    break;
                }
                now += wait;
                self.halve_at(now);
            },
            ModelSpec::TcpConstant { lambda } => loop {
                let wait = rng.exp_rate(lambda);
                if now + wait > until {
                    break;
                }
                now += wait;
                self.halve_at(now);
            },
            ModelSpec::Storage { alpha, .. } => {
                let times = poisson_times(alpha, now, until, rng);
                for t in times {
                    let mark = rng.exp1();
                    let v = self.state_at(t) + mark;
                    self.jump_to(t, v);
                }
            }
        }
    }

    pub(crate) fn finish(self, horizon: f64) -> Trajectory {
        Trajectory {
            model: self.model,
            x0: self.x0,
            horizon,
            jump_times: self.jump_times,
            post_jump_values: self.post_jump_values,
            resync: self.resync,
        }
    }
}

/// Arrival times of a rate-`rate` Poisson process on `(from, until]`.
pub(crate) fn poisson_times(rate: f64, from: f64, until: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut times = Vec::new();
    let mut now = from;
    loop {
        now += rng.exp_rate(rate);
        if now > until {
            return times;
        }
        times.push(now);
    }
}

/// Samples one exact path of `model` started at `x0` over `[0, horizon]`.
pub fn simulate_path(
    model: &ModelSpec,
    x0: f64,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    model.validate()?;
    if !(x0.is_finite() && x0 >= 0.0) {
        return usage(format!("initial state must be finite and nonnegative, got {x0}"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return usage(format!("horizon must be finite and positive, got {horizon}"));
    }
    let mut b = PathBuilder::new(*model, x0);
    b.advance(0.0, horizon, rng);
    Ok(b.finish(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn jump_time_examples() {
        assert_eq!(tcp_jump_time_from_exp(3.0, 0.0), 0.0);
        assert!((tcp_jump_time_from_exp(0.0, 2.0) - 2.0).abs() < 1e-15);
        // x = 1, e = 1.5 -> t with t^2/2 + t = 1.5 -> t = 1
        assert!((tcp_jump_time_from_exp(1.0, 1.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jump_time_inverts_survival() {
        for &x in &[0.0, 0.3, 5.0, 1e6] {
            for &e in &[1e-12, 0.1, 1.0, 7.0] {
                let t = tcp_jump_time_from_exp(x, e);
                let back = 0.5 * t * t + x * t;
                assert!((back - e).abs() <= 1e-12 * e.max(1.0), "x={x} e={e}");
            }
        }
    }

    #[test]
    fn flow_examples() {
        let tv = ModelSpec::tcp_variable();
        assert_eq!(flow(&tv, 2.0, 0.0), 2.0);
        let tc = ModelSpec::tcp_constant(1.0).unwrap();
        assert_eq!(flow(&tc, 0.5, 1.5), 2.0);
        let st = ModelSpec::storage(1.0, 2.0).unwrap();
        assert!((flow(&st, 4.0, LN_2 / 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(tcp_survival(7.0, 0.0), 1.0);
        assert!((tcp_survival(0.0, (2.0 * LN_2).sqrt()) - 0.5).abs() < 1e-15);
        assert!((tcp_survival(1.0, 1.0) - (-1.5f64).exp()).abs() < 1e-16);
        assert!((tcp_survival(1.0, 1.0) - 0.22313).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelSpec::tcp_constant(0.0).is_err());
        assert!(ModelSpec::tcp_constant(f64::NAN).is_err());
        assert!(ModelSpec::storage(1.0, -2.0).is_err());
        let mut rng = RngStream::new(0, 0);
        assert!(simulate_path(&ModelSpec::TcpVariable, 1.0, 0.0, &mut rng).is_err());
        assert!(simulate_path(&ModelSpec::TcpVariable, -1.0, 1.0, &mut rng).is_err());
        let bad = ModelSpec::TcpConstant { lambda: -1.0 };
        assert!(simulate_path(&bad, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn evaluate_single_jump() {
        let mut b = PathBuilder::new(ModelSpec::TcpVariable, 2.0);
        b.halve_at(1.0);
        let tr = b.finish(3.0);
        assert_eq!(tr.evaluate(0.0).unwrap(), 2.0);
        assert_eq!(tr.evaluate(1.0).unwrap(), 1.5);
        assert_eq!(tr.evaluate(1.5).unwrap(), 2.0);
        assert_eq!(tr.pre_jump_value(0), 3.0);
        assert!(tr.evaluate(3.5).is_err());
        assert!(tr.evaluate(-0.1).is_err());
    }

    #[test]
    fn evaluate_storage_pure_flow() {
        let st = ModelSpec::storage(1.0, 2.0).unwrap();
        let tr = PathBuilder::new(st, 4.0).finish(1.0);
        assert!((tr.evaluate(LN_2 / 2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jump_at_horizon_is_kept() {
        let mut b = PathBuilder::new(ModelSpec::TcpVariable, 1.0);
        b.halve_at(2.0);
        let tr = b.finish(2.0);
        assert_eq!(tr.evaluate(2.0).unwrap(), 1.5);
    }

    #[test]
    fn resync_knot_takes_over() {
        let mut b = PathBuilder::new(ModelSpec::TcpVariable, 1.0);
        b.halve_at(1.0);
        b.resync_at(1.5, 1.5000000000000002);
        let tr = b.finish(3.0);
        assert_eq!(tr.evaluate(1.2).unwrap(), 1.2);
        assert_eq!(tr.evaluate(2.5).unwrap(), 1.5000000000000002 + 1.0);
    }

    #[test]
    fn skeleton_consistency() {
        let models = [
            ModelSpec::tcp_variable(),
            ModelSpec::tcp_constant(2.0).unwrap(),
            ModelSpec::storage(1.5, 0.7).unwrap(),
        ];
        for (k, m) in models.iter().enumerate() {
            for id in 0..200 {
                let mut rng = RngStream::new(11 + k as u64, id);
                let tr = simulate_path(m, 3.0, 20.0, &mut rng).unwrap();
                let times = tr.jump_times();
                assert!(times.windows(2).all(|w| w[0] < w[1]));
                assert!(times.iter().all(|&t| t > 0.0 && t <= 20.0));
                for i in 0..times.len() {
                    let pre = tr.pre_jump_value(i);
                    let post = tr.post_jump_values()[i];
                    assert!(post >= 0.0);
                    if m.is_tcp() {
                        assert_eq!(post, 0.5 * pre);
                    } else {
                        assert!(post > pre);
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let m = ModelSpec::tcp_variable();
        let a = simulate_path(&m, 0.5, 30.0, &mut RngStream::new(9, 4)).unwrap();
        let b = simulate_path(&m, 0.5, 30.0, &mut RngStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&m, 0.5, 30.0, &mut RngStream::new(9, 5)).unwrap();
        assert_ne!(a, c);
    }
}
