//! Closed-form bounds reported as named values.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytics::constants::{lambda_half_closed_form, m_half_closed_form};
use crate::error::{usage, Result};
use crate::processes::{tcp_survival, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub inputs: BTreeMap<String, f64>,
    /// Reported value, clamped to `[0, 1]` for probability-type bounds.
    pub value: f64,
    /// Value before clamping.
    pub raw_value: f64,
    pub clamped: bool,
}

impl BoundReport {
    pub fn plain(name: &str, inputs: BTreeMap<String, f64>, value: f64) -> Self {
        Self {
            bound_name: name.to_string(),
            inputs,
            value,
            raw_value: value,
            clamped: false,
        }
    }

    pub fn probability(name: &str, inputs: BTreeMap<String, f64>, raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self {
            bound_name: name.to_string(),
            inputs,
            value,
            raw_value: raw,
            clamped: value != raw,
        }
    }
}

/// `C(p, t0, theta)` such that `E|X_t - Y_t|^p <= C e^{-lambda theta t}` for
/// every `t >= t0` and every pair of initial laws.
pub fn wasserstein_bound_constant(p: f64, t0: f64, theta: f64) -> Result<f64> {
    if !(p >= 1.0) || !(t0 > 0.0) || !(theta > 0.0 && theta < 1.0) {
        return usage(format!(
            "constant needs p >= 1, t0 > 0, 0 < theta < 1; got p={p}, t0={t0}, theta={theta}"
        ));
    }
    let m = m_half_closed_form();
    let lambda = lambda_half_closed_form();
    let q = (2.0 * p - theta) / (1.0 - theta);
    Ok(2f64.powf(p) / m.powf(theta / 2.0)
        * (q.sqrt() + q / t0).powf(p - theta / 2.0)
        * (2f64.sqrt() + 2.0 / t0).powf(theta / 2.0)
        * (lambda * theta * t0).exp())
}

/// Contraction-type bound on `E_{x,y}|X_t - Y_t|^p`, valid for all `t > 0`:
/// `2^{p - theta/2} M^{-theta/2} (sqrt(q) + q/t)^{p - theta/2}
///  e^{-lambda theta t} |x - y|^{theta/2}` with `q = (2p - theta)/(1 - theta)`.
pub fn contraction_moment_bound(p: f64, theta: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(p >= 1.0) || !(t > 0.0) || !(theta > 0.0 && theta < 1.0) {
        return usage(format!(
            "bound needs p >= 1, t > 0, 0 < theta < 1; got p={p}, t={t}, theta={theta}"
        ));
    }
    let m = m_half_closed_form();
    let lambda = lambda_half_closed_form();
    let q = (2.0 * p - theta) / (1.0 - theta);
    Ok(2f64.powf(p - theta / 2.0) / m.powf(theta / 2.0)
        * (q.sqrt() + q / t).powf(p - theta / 2.0)
        * (-lambda * theta * t).exp()
        * (x - y).abs().powf(theta / 2.0))
}

/// `E_{x,y}|X_t - Y_t|^{1/2} <= M^{-1/2} e^{-lambda t} |x - y|^{1/2}` under
/// the Wasserstein coupling.
pub fn sqrt_contraction_bound(t: f64, x: f64, y: f64) -> f64 {
    (-lambda_half_closed_form() * t).exp() * (x - y).abs().sqrt() / m_half_closed_form().sqrt()
}

/// Wasserstein rate `lambda (1 - 2^-p) / p` of the constant-rate model.
pub fn constant_rate_wp_rate(lambda: f64, p: f64) -> f64 {
    lambda * (1.0 - 2f64.powf(-p)) / p
}

/// `lambda e^{-lambda t/2} |x - y| + e^{-lambda t}`.
pub fn constant_rate_tv_bound(lambda: f64, x: f64, y: f64, t: f64) -> f64 {
    lambda * (-lambda * t / 2.0).exp() * (x - y).abs() + (-lambda * t).exp()
}

/// `|x - y| e^{-beta t}`, valid for every order p.
pub fn storage_wp_bound(beta: f64, x: f64, y: f64, t: f64) -> f64 {
    (x - y).abs() * (-beta * t).exp()
}

/// `alpha (e^{-beta t} - e^{-alpha t}) / (alpha - beta)`, continuous at
/// `alpha = beta` where it equals `alpha t e^{-alpha t}`.
fn storage_last_jump_factor(alpha: f64, beta: f64, t: f64) -> f64 {
    let d = alpha - beta;
    if d == 0.0 {
        alpha * t * (-alpha * t).exp()
    } else {
        alpha * (-beta * t).exp() * (-(-d * t).exp_m1()) / d
    }
}

/// `e^{-alpha t} + |x - y| alpha (e^{-beta t} - e^{-alpha t}) / (alpha - beta)`,
/// with the limiting form `(1 + |x - y| alpha t) e^{-alpha t}` at `alpha = beta`.
pub fn storage_tv_bound(alpha: f64, beta: f64, x: f64, y: f64, t: f64) -> f64 {
    (-alpha * t).exp() + (x - y).abs() * storage_last_jump_factor(alpha, beta, t)
}

/// Surviving atom: `TV(delta_x P_t, delta_y P_t) >= e^{-t^2/2 - (x ^ y) t}`
/// for `x != y` (variable-rate TCP).
pub fn tcp_atom_lower_bound(x: f64, y: f64, t: f64) -> f64 {
    if x == y {
        0.0
    } else {
        tcp_survival(x.min(y), t)
    }
}

/// Same atom argument for the constant-rate model: no jump before `t`.
pub fn constant_rate_atom_lower_bound(lambda: f64, x: f64, y: f64, t: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (-lambda * t).exp()
    }
}

/// All named bounds that apply to `model` between `delta_x P_t` and
/// `delta_y P_t`; `p` is the Wasserstein order.
pub fn bounds_misc(model: &ModelSpec, x: f64, y: f64, t: f64, p: f64) -> Result<Vec<BoundReport>> {
    model.validate()?;
    if !(t >= 0.0) || !(x >= 0.0) || !(y >= 0.0) || !(p >= 1.0) {
        return usage(format!(
            "bounds need x, y, t >= 0 and p >= 1; got x={x}, y={y}, t={t}, p={p}"
        ));
    }
    let mut inputs = BTreeMap::from([
        ("x".to_string(), x),
        ("y".to_string(), y),
        ("t".to_string(), t),
    ]);
    let reports = match *model {
        ModelSpec::TcpVariable => vec![BoundReport::probability(
            "tcp_atom_lower",
            inputs,
            tcp_atom_lower_bound(x, y, t),
        )],
        ModelSpec::TcpConstant { lambda } => {
            inputs.insert("lambda".to_string(), lambda);
            let mut rate_inputs = BTreeMap::from([("lambda".to_string(), lambda)]);
            rate_inputs.insert("p".to_string(), p);
            let rate = constant_rate_wp_rate(lambda, p);
            let mut wp_inputs = inputs.clone();
            wp_inputs.insert("p".to_string(), p);
            vec![
                BoundReport::plain("constant_wp_rate", rate_inputs, rate),
                BoundReport::plain(
                    "constant_wp",
                    wp_inputs,
                    (x - y).abs() * (-rate * t).exp(),
                ),
                BoundReport::probability(
                    "constant_tv",
                    inputs.clone(),
                    constant_rate_tv_bound(lambda, x, y, t),
                ),
                BoundReport::probability(
                    "constant_atom_lower",
                    inputs,
                    constant_rate_atom_lower_bound(lambda, x, y, t),
                ),
            ]
        }
        ModelSpec::Storage { alpha, beta } => {
            inputs.insert("alpha".to_string(), alpha);
            inputs.insert("beta".to_string(), beta);
            vec![
                BoundReport::plain("storage_wp", inputs.clone(), storage_wp_bound(beta, x, y, t)),
                BoundReport::probability(
                    "storage_tv",
                    inputs,
                    storage_tv_bound(alpha, beta, x, y, t),
                ),
            ]
        }
    };
    Ok(reports)
}
