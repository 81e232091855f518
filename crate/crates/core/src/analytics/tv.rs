//! Total-variation side: the one-shot coalescence probability, the schedule
//! of the hybrid coupling and its explicit failure bound.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::analytics::bounds::BoundReport;
use crate::analytics::constants::{lambda_half_closed_form, m_half_closed_form};
use crate::error::{usage, Error, Result};
use crate::processes::tcp_survival;
use crate::quadrature::integrate;

/// Absolute tolerance of every overlap integral.
pub const OVERLAP_TOL: f64 = 1e-10;

/// Density `(x + s) exp(-s^2/2 - x s)` of the first jump time from `x`.
pub fn tcp_jump_density(x: f64, s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        (x + s) * (-0.5 * s * s - x * s).exp()
    }
}

/// `alpha(x) = int_0^inf exp(-u^2/2 - u x) du = sqrt(pi/2) e^{x^2/2} erfc(x/sqrt 2)`.
pub fn alpha_integral(x: f64) -> f64 {
    if x <= 30.0 {
        (PI / 2.0).sqrt() * (0.5 * x * x).exp() * libm::erfc(x / 2f64.sqrt())
    } else {
        // Mills-ratio asymptotics; the next term is below 1e-12 relative.
        let r = 1.0 / (x * x);
        (1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)))) / x
    }
}

/// `I(x, y, t) = int_{x-y}^{t} min(f_x(s), f_y(s - x + y)) ds` for `x > y`.
pub fn first_jump_overlap(x: f64, y: f64, t: f64) -> Result<f64> {
    let delta = x - y;
    integrate(
        |s| tcp_jump_density(x, s).min(tcp_jump_density(y, s - delta)),
        delta,
        t,
        OVERLAP_TOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoalescenceBounds {
    /// `q_t(x, y)` with the overlap integral evaluated by quadrature.
    pub quadrature: f64,
    /// `(p_eps(x) - p_t(x) - 2 eps alpha(x)) p_eps((x + t)/2)`.
    pub explicit: f64,
    /// Lower bound on `q_t` over pairs in `[0, x0]^2` at distance `<= eps`.
    pub uniform_on_a: f64,
}

/// Lower bounds on the success probability of one coalescence attempt over a
/// window of length `t`, for `t >= eps >= x - y > 0`. `x0_ceiling` bounds
/// both coordinates for the uniform bound.
pub fn coalescence_bound_q(
    x: f64,
    y: f64,
    t: f64,
    eps: f64,
    x0_ceiling: f64,
) -> Result<CoalescenceBounds> {
    let delta = x - y;
    // slack for gaps like 1.05 - 1 that round just above eps
    let slack = 4.0 * f64::EPSILON * x.abs().max(1.0);
    if !(delta > 0.0 && eps + slack >= delta && t >= eps) || !(y >= 0.0) {
        return usage(format!(
            "coalescence bound needs t >= eps >= x - y > 0, got x={x}, y={y}, t={t}, eps={eps}"
        ));
    }
    let overlap = first_jump_overlap(x, y, t)?;
    let quadrature = overlap * tcp_survival(0.5 * (x + t), delta);
    let explicit = (tcp_survival(x, eps) - tcp_survival(x, t) - 2.0 * eps * alpha_integral(x))
        * tcp_survival(0.5 * (x + t), eps);
    let uniform_on_a = (-eps * eps - 0.5 * (3.0 * x0_ceiling + t) * eps).exp()
        - (-0.5 * t * t).exp()
        - (2.0 * PI).sqrt() * eps;
    Ok(CoalescenceBounds {
        quadrature,
        explicit,
        uniform_on_a,
    })
}

/// `a(t) = t / (2e (t + 1))`, the slope of the finite-time tail bound.
pub fn tail_slope(t: f64) -> f64 {
    t / (2.0 * E * (t + 1.0))
}

/// Parameters of the hybrid coupling: Wasserstein phase of length `t1`,
/// one coalescence attempt of length `t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleParams {
    pub epsilon: f64,
    pub t1: f64,
    pub t2: f64,
    pub x0_cut: f64,
    pub t0: f64,
}

impl ScheduleParams {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// Splits the total time `t` as `t1 + t2` with `t2 = sqrt(2 ln(1/eps))`,
/// `t1 = 3 ln(1/eps) / (2 lambda)` and `x0 = ln(1/eps) / a(t0)`.
pub fn plan_tv_schedule(t: f64, t0: f64) -> Result<ScheduleParams> {
    if !(t > 0.0 && t.is_finite()) || !(t0 > 0.0 && t0.is_finite()) {
        return usage(format!("schedule needs finite t > 0 and t0 > 0, got t={t}, t0={t0}"));
    }
    let lambda = lambda_half_closed_form();
    let slope = 1.5 / lambda;
    // slope * s^2 + sqrt(2) * s = t with s = sqrt(ln(1/eps))
    let s = (-(2f64.sqrt()) + (2.0 + 4.0 * slope * t).sqrt()) / (2.0 * slope);
    let log_inv = s * s;
    let params = ScheduleParams {
        epsilon: (-log_inv).exp(),
        t1: slope * log_inv,
        t2: (2.0 * log_inv).sqrt(),
        x0_cut: log_inv / tail_slope(t0),
        t0,
    };
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::ScheduleInfeasible(format!(
            "epsilon = {} is not in (0, 1)",
            params.epsilon
        )));
    }
    if params.t1 < t0 {
        return Err(Error::ScheduleInfeasible(format!(
            "t1 = {:.4} is below the anchor time t0 = {t0}",
            params.t1
        )));
    }
    if params.x0_cut < params.t2 {
        return Err(Error::ScheduleInfeasible(format!(
            "x0 = {:.4} is below t2 = {:.4}",
            params.x0_cut, params.t2
        )));
    }
    let tail_threshold = 2.0 * E * (1.0 + 1.0 / params.t1);
    if params.x0_cut < tail_threshold {
        return Err(Error::ScheduleInfeasible(format!(
            "x0 = {:.4} is below the tail-bound threshold 2e(1 + 1/t1) = {tail_threshold:.4}",
            params.x0_cut
        )));
    }
    Ok(params)
}

/// Constant `sqrt((2 sqrt 2 + 4/t0) / M) e^{lambda t0}` of the square-root
/// moment bound after time `t0`.
pub fn sqrt_moment_constant(t0: f64) -> f64 {
    let m = m_half_closed_form();
    ((2.0 * 2f64.sqrt() + 4.0 / t0) / m).sqrt() * (lambda_half_closed_form() * t0).exp()
}

/// The six summands of the hybrid-coupling failure bound, in order:
/// `eps^2`, `2 eps x0`, `e^{-t2^2/2}`, `sqrt(2 pi) eps`, `2 e^{-a(t0) x0}`,
/// `C eps^{-1/2} e^{-lambda t1}`.
pub fn tv_bound_terms(params: &ScheduleParams) -> [f64; 6] {
    let eps = params.epsilon;
    [
        eps * eps,
        2.0 * eps * params.x0_cut,
        (-0.5 * params.t2 * params.t2).exp(),
        (2.0 * PI).sqrt() * eps,
        2.0 * (-tail_slope(params.t0) * params.x0_cut).exp(),
        sqrt_moment_constant(params.t0) / eps.sqrt() * (-lambda_half_closed_form() * params.t1).exp(),
    ]
}

pub fn tv_bound_hybrid(params: &ScheduleParams) -> BoundReport {
    let raw: f64 = tv_bound_terms(params).iter().sum();
    let inputs = BTreeMap::from([
        ("epsilon".to_string(), params.epsilon),
        ("t1".to_string(), params.t1),
        ("t2".to_string(), params.t2),
        ("x0".to_string(), params.x0_cut),
        ("t0".to_string(), params.t0),
    ]);
    BoundReport::probability("tv_hybrid", inputs, raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert!((alpha_integral(0.0) - (PI / 2.0).sqrt()).abs() < 1e-15);
        assert!((alpha_integral(0.0) - 1.25331).abs() < 1e-5);
        for &x in &[0.3, 2.0, 7.5] {
            let q = integrate(|u| (-0.5 * u * u - u * x).exp(), 0.0, f64::INFINITY, 1e-13).unwrap();
            assert!((alpha_integral(x) - q).abs() < 1e-10, "x={x}");
        }
        // both branches agree near the switch
        let r = 1.0 / (30.0f64 * 30.0);
        let asym = (1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)))) / 30.0;
        assert!((alpha_integral(30.0) - asym).abs() < 1e-12);
    }

    #[test]
    fn jump_density_normalized() {
        for &x in &[0.0, 1.0, 4.0] {
            let v = integrate(|s| tcp_jump_density(x, s), 0.0, f64::INFINITY, 1e-12).unwrap();
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_dominates_explicit() {
        let b = coalescence_bound_q(1.05, 1.0, 3.0, 0.05, 1.05).unwrap();
        assert!(b.quadrature >= b.explicit);
        assert!(b.explicit > 0.0);
        assert!(b.quadrature <= 1.0);
    }

    #[test]
    fn shrinking_gap_limit() {
        let (x, d, t) = (0.5, 1e-6, 3.0);
        let b = coalescence_bound_q(x, x - d, t, d, x).unwrap();
        let limit = tcp_survival(0.5 * (x + t), d) * (tcp_survival(x, d) - tcp_survival(x, t));
        assert!((b.quadrature - limit).abs() < 1e-4);
    }

    #[test]
    fn coalescence_preconditions() {
        assert!(coalescence_bound_q(1.0, 1.0, 3.0, 0.1, 1.0).is_err());
        assert!(coalescence_bound_q(1.2, 1.0, 3.0, 0.1, 1.2).is_err());
        assert!(coalescence_bound_q(1.05, 1.0, 0.01, 0.05, 1.05).is_err());
    }

    #[test]
    fn schedule_identities() {
        let s = plan_tv_schedule(15.0, 1.0).unwrap();
        assert!((s.total() - 15.0).abs() < 1e-10);
        let l = (1.0 / s.epsilon).ln();
        assert!((s.t2 - (2.0 * l).sqrt()).abs() < 1e-12);
        assert!((s.t1 - 1.5 / lambda_half_closed_form() * l).abs() < 1e-10);
        assert!((s.x0_cut - l / tail_slope(1.0)).abs() < 1e-10);
        assert!(s.x0_cut >= s.t2.max(2.0 * E * (1.0 + 1.0 / s.t1)));
    }

    #[test]
    fn schedule_infeasible_for_short_times() {
        match plan_tv_schedule(1.0, 1.0) {
            Err(Error::ScheduleInfeasible(msg)) => assert!(msg.contains("t1") || msg.contains("x0")),
            other => panic!("expected infeasible schedule, got {other:?}"),
        }
        assert!(plan_tv_schedule(-1.0, 1.0).is_err());
    }

    #[test]
    fn bound_terms_vanish_monotonically() {
        let mut prev = [f64::INFINITY; 6];
        for &t in &[40.0, 80.0, 160.0, 320.0, 640.0] {
            let terms = tv_bound_terms(&plan_tv_schedule(t, 1.0).unwrap());
            for (a, b) in terms.iter().zip(prev.iter()) {
                assert!(*a >= 0.0 && a < b);
            }
            prev = terms;
        }
        assert!(prev.iter().all(|&v| v < 1e-6));
    }

    #[test]
    fn hybrid_bound_clamped_for_short_horizons() {
        let r = tv_bound_hybrid(&plan_tv_schedule(15.0, 1.0).unwrap());
        assert!(r.clamped);
        assert_eq!(r.value, 1.0);
        assert!(r.raw_value > 1.0);
        let r = tv_bound_hybrid(&plan_tv_schedule(160.0, 1.0).unwrap());
        assert!(!r.clamped && r.value < 0.01);
    }
}
