//! Contraction constants of the Wasserstein coupling.
//!
//! For `0 < y <= x` and `u = y / x`, the coupling generator applied to
//! `V_p(x, y) = |x - y|^p` factors as `-x [1 - phi_p(u)] V_p(x, y)` with
//!
//! ```text
//! phi_p(u) = 2^-p u + (1 - u)^(1 - p) |u - 1/2|^p
//! ```
//!
//! (the simultaneous jump at rate `y` multiplies the gap by `2^-p`, the solo
//! jump of `x` at rate `x - y` replaces the gap by `|y - x/2|`). With
//! `M_p = max phi_p` and the weight `psi(x) = 1 + alpha (1 - x/x0)^2` below
//! `x0`, the weighted function `psi(x v y) V_p` decays at rate
//! `min(2 alpha / (x0 (1 + alpha)), x0 (1 - (1 + alpha) M_p))`, maximized at
//! `alpha = 1/sqrt(M_p) - 1`, `x0 = sqrt(2)`, where it equals
//! `sqrt(2) (1 - sqrt(M_p))`.

use serde::Serialize;

use crate::error::{usage, Result};

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn phi(u: f64, p: f64) -> f64 {
    2f64.powf(-p) * u + (1.0 - u).powf(1.0 - p) * (u - 0.5).abs().powf(p)
}

/// `max phi_{1/2} = sqrt(2) (3 + sqrt(3)) / 8`.
pub fn m_half_closed_form() -> f64 {
    2f64.sqrt() * (3.0 + 3f64.sqrt()) / 8.0
}

/// Argmax of `phi_{1/2}`: `(9 + sqrt(3)) / 12`.
pub fn u_star_half_closed_form() -> f64 {
    (9.0 + 3f64.sqrt()) / 12.0
}

/// `sqrt(2) (1 - sqrt(M))` at `p = 1/2`, about 0.1208.
pub fn lambda_half_closed_form() -> f64 {
    2f64.sqrt() * (1.0 - m_half_closed_form().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionConstants {
    pub p: f64,
    /// Maximum of `phi_p` over `[0, 1]`.
    pub m: f64,
    pub lambda: f64,
    /// Height of the `psi` bump.
    pub alpha: f64,
    /// Knee of `psi`.
    pub x0: f64,
    pub u_star: f64,
}

impl ContractionConstants {
    /// The two arguments of the `min` defining the rate.
    pub fn branches(&self) -> (f64, f64) {
        let a = self.alpha;
        (
            2.0 * a / (self.x0 * (1.0 + a)),
            self.x0 * (1.0 - (1.0 + a) * self.m),
        )
    }
}

const SCAN_POINTS: usize = 2000;
const GOLDEN_TOL: f64 = 1e-12;

fn maximize_phi(p: f64) -> (f64, f64) {
    let h = 1.0 / SCAN_POINTS as f64;
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=SCAN_POINTS {
        let v = phi(i as f64 * h, p);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = (best as f64 - 1.0).max(0.0) * h;
    let hi = ((best + 1) as f64 * h).min(1.0);
    let u = golden_max(|u| phi(u, p), lo, hi, GOLDEN_TOL);
    let v = phi(u, p);
    if v >= best_val {
        (u, v)
    } else {
        (best as f64 * h, best_val)
    }
}

/// Best drift rate for the exponent `p`, obtained by equating the two
/// branches of the `min` (which move in opposite directions in `x0`) and
/// searching over `alpha`.
pub fn contraction_constants(p: f64) -> Result<ContractionConstants> {
    if !(p > 0.0 && p < 1.0) {
        return usage(format!("exponent p must lie in (0, 1), got {p}"));
    }
    let (u_star, m) = maximize_phi(p);
    // For fixed alpha the branches meet at x0^2 = 2a / ((1+a)(1-(1+a)M)).
    let knee = |a: f64| (2.0 * a / ((1.0 + a) * (1.0 - (1.0 + a) * m))).sqrt();
    let rate = |a: f64| knee(a) * (1.0 - (1.0 + a) * m);
    let alpha = golden_max(rate, 0.0, 1.0 / m - 1.0, GOLDEN_TOL);
    let x0 = knee(alpha);
    Ok(ContractionConstants {
        p,
        m,
        lambda: rate(alpha),
        alpha,
        x0,
        u_star,
    })
}

/// Weight `psi`, quadratic below `x0` and equal to 1 above.
pub fn psi(x: f64, alpha: f64, x0: f64) -> f64 {
    if x <= x0 {
        let r = 1.0 - x / x0;
        1.0 + alpha * r * r
    } else {
        1.0
    }
}

/// Lyapunov function `psi(x v y) |x - y|^(1/2)` of the Wasserstein coupling.
pub fn v_tilde(x: f64, y: f64, alpha: f64, x0: f64) -> f64 {
    psi(x.max(y), alpha, x0) * (x - y).abs().sqrt()
}
