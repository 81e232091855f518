//! Moment bounds, tail bounds, the invariant density of the variable-rate
//! TCP process and the explicit moments of the constant-rate model.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{usage, Result};

/// Uniform-in-`x` bound `(sqrt(2p) + 2p/t)^p` on `E_x[X_t^p]`.
pub fn wasserstein_moment_bound(p: f64, t: f64) -> Result<f64> {
    if !(p >= 1.0) || !(t > 0.0) {
        return usage(format!("moment bound needs p >= 1 and t > 0, got p={p}, t={t}"));
    }
    Ok(((2.0 * p).sqrt() + 2.0 * p / t).powf(p))
}

/// Tail bounds for the variable-rate TCP process. A bound whose level is
/// below its validity threshold is reported as 1 with the flag cleared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationBounds {
    pub finite_time: f64,
    pub finite_time_valid: bool,
    pub stationary: f64,
    pub stationary_valid: bool,
}

/// Smallest level at which the finite-time tail bound applies.
pub fn finite_time_threshold(t: f64) -> f64 {
    2.0 * E * (1.0 + 1.0 / t)
}

pub fn deviation_bounds(t: f64, r: f64) -> Result<DeviationBounds> {
    if !(t > 0.0) || r.is_nan() {
        return usage(format!("deviation bounds need t > 0, got t={t}, r={r}"));
    }
    let finite_time_valid = r >= finite_time_threshold(t);
    let stationary_valid = r >= (2.0 * E).sqrt();
    Ok(DeviationBounds {
        finite_time: if finite_time_valid {
            (-t / (2.0 * E * (t + 1.0)) * r).exp()
        } else {
            1.0
        },
        finite_time_valid,
        stationary: if stationary_valid {
            (-r * r / (4.0 * E)).exp()
        } else {
            1.0
        },
        stationary_valid,
    })
}

/// Density of the invariant law of the variable-rate TCP process:
///
/// ```text
/// sqrt(2/pi) / prod_{n>=0} (1 - 2^-(2n+1))
///   * sum_{n>=0} (-1)^n 4^n / prod_{k=1..n} (4^k - 1) * exp(-2^(2n-1) x^2)
/// ```
///
/// The product stops once its factors are within `tol/10` of 1 and the
/// series once the next term is below `tol` in magnitude.
pub fn invariant_density(x: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut product = 1.0;
    let mut n = 0;
    loop {
        let gap = 2f64.powi(-(2 * n + 1));
        if gap < tol / 10.0 {
            break;
        }
        product *= 1.0 - gap;
        n += 1;
    }
    let prefactor = (2.0 / PI).sqrt() / product;
    let x2 = x * x;
    let mut coeff = 1.0;
    let mut sum = 0.0;
    let mut n = 0i32;
    loop {
        let term = coeff * (-(2f64.powi(2 * n - 1)) * x2).exp();
        if prefactor * term < tol && n > 0 {
            break;
        }
        sum += if n % 2 == 0 { term } else { -term };
        n += 1;
        coeff *= 4.0 / (4f64.powi(n) - 1.0);
        if coeff == 0.0 {
            break;
        }
    }
    prefactor * sum
}

/// `m_{p+1} = p m_{p-1} / (1 - 2^-p)` for the invariant moments.
pub fn invariant_moment_step(p: f64, m_prev: f64) -> Result<f64> {
    if !(p > 0.0) || !(m_prev >= 0.0) {
        return usage(format!("moment step needs p > 0 and m >= 0, got p={p}, m={m_prev}"));
    }
    Ok(p * m_prev / (1.0 - 2f64.powf(-p)))
}

/// Bracket `[1/sqrt(ln 2), sqrt(2)]` on the invariant mean.
pub fn invariant_mean_bracket() -> (f64, f64) {
    (1.0 / std::f64::consts::LN_2.sqrt(), 2f64.sqrt())
}

fn theta(lambda: f64, j: u32) -> f64 {
    lambda * (1.0 - 2f64.powi(-(j as i32)))
}

/// `E_x[X_t^n]` for the constant-rate TCP process with jump rate `lambda`;
/// `t = +inf` gives the stationary moment `n! / prod theta_k`.
pub fn constant_rate_moment(lambda: f64, x: f64, n: u32, t: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) || n == 0 || !(t >= 0.0) || !(x >= 0.0) {
        return usage(format!(
            "constant-rate moment needs lambda > 0, n >= 1, t >= 0, x >= 0; got lambda={lambda}, n={n}, t={t}, x={x}"
        ));
    }
    let thetas: Vec<f64> = (0..=n).map(|j| theta(lambda, j)).collect();
    let fact_n: f64 = (1..=n).map(f64::from).product();
    let stationary = fact_n / thetas[1..].iter().product::<f64>();
    if t.is_infinite() {
        return Ok(stationary);
    }
    let mut transient = 0.0;
    for m in 1..=n as usize {
        let mut inner = 0.0;
        let mut x_pow_over_fact = 1.0;
        for k in 0..=m {
            if k > 0 {
                x_pow_over_fact *= x / k as f64;
            }
            let mut prod = 1.0;
            for (j, th) in thetas.iter().enumerate().skip(k) {
                if j != m {
                    prod /= th - thetas[m];
                }
            }
            inner += x_pow_over_fact * prod;
        }
        transient += inner * (-thetas[m] * t).exp();
    }
    Ok(stationary + fact_n * transient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn moment_bound_examples() {
        assert!((wasserstein_moment_bound(1.0, 2.0).unwrap() - (2f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!((wasserstein_moment_bound(2.0, 1.0).unwrap() - 36.0).abs() < 1e-12);
        assert!(wasserstein_moment_bound(0.5, 1.0).is_err());
        assert!(wasserstein_moment_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn deviation_examples() {
        let d = deviation_bounds(1.0, 4.0 * E).unwrap();
        assert!(d.finite_time_valid);
        assert!((d.finite_time - (-1.0f64).exp()).abs() < 1e-15);
        let s = deviation_bounds(1.0, 2.0 * E.sqrt()).unwrap();
        assert!(s.stationary_valid);
        assert!((s.stationary - (-1.0f64).exp()).abs() < 1e-15);
        let low = deviation_bounds(1.0, 1.0).unwrap();
        assert!(!low.finite_time_valid && !low.stationary_valid);
        assert_eq!(low.finite_time, 1.0);
        assert_eq!(low.stationary, 1.0);
    }

    fn moment(k: i32) -> f64 {
        integrate(
            |x| x.powi(k) * invariant_density(x, 1e-15),
            0.0,
            f64::INFINITY,
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn invariant_density_normalization_and_moments() {
        assert!((moment(0) - 1.0).abs() < 1e-8);
        assert!((moment(2) - 2.0).abs() < 1e-6);
        assert!((moment(4) - 48.0 / 7.0).abs() < 1e-6);
        // ln(2) m_1 = m_{-1}
        let m1 = moment(1);
        let (lo, hi) = invariant_mean_bracket();
        assert!(m1 > lo && m1 < hi);
        assert!((std::f64::consts::LN_2 * m1 - moment(-1)).abs() < 1e-7);
    }

    #[test]
    fn invariant_density_truncation() {
        for &x in &[0.05, 0.3, 1.0, 2.5] {
            for &tol in &[1e-6, 1e-10] {
                let a = invariant_density(x, tol);
                let b = invariant_density(x, tol * 1e-4);
                assert!((a - b).abs() < tol, "x={x} tol={tol}");
            }
        }
        assert_eq!(invariant_density(0.0, 1e-10), 0.0);
    }

    #[test]
    fn moment_step_examples() {
        assert_eq!(invariant_moment_step(1.0, 1.0).unwrap(), 2.0);
        assert!((invariant_moment_step(3.0, 2.0).unwrap() - 48.0 / 7.0).abs() < 1e-14);
        let (lo, hi) = invariant_mean_bracket();
        let m3_lo = invariant_moment_step(2.0, lo).unwrap();
        let m3_hi = invariant_moment_step(2.0, hi).unwrap();
        assert!((m3_lo - 8.0 * lo / 3.0).abs() < 1e-14);
        assert!((m3_hi - 8.0 * hi / 3.0).abs() < 1e-14);
        assert!(invariant_moment_step(0.0, 1.0).is_err());
    }

    #[test]
    fn constant_rate_initial_condition() {
        for n in 1..=4 {
            let v = constant_rate_moment(1.0, 3.0, n, 0.0).unwrap();
            let want = 3f64.powi(n as i32);
            assert!((v - want).abs() <= 1e-9 * want, "n={n}: {v}");
        }
    }

    #[test]
    fn constant_rate_stationary_mean() {
        assert!((constant_rate_moment(1.0, 0.0, 1, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
        assert!((constant_rate_moment(1.0, 5.0, 1, 200.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((constant_rate_moment(2.5, 0.0, 1, f64::INFINITY).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn constant_rate_first_moment_closed_form() {
        // n = 1: m(t) = 2/lambda + (x - 2/lambda) exp(-lambda t / 2)
        for &(l, x, t) in &[(1.0f64, 0.0f64, 3.0f64), (2.0, 1.0, 0.7), (0.5, 4.0, 2.0)] {
            let want = 2.0 / l + (x - 2.0 / l) * (-l * t / 2.0).exp();
            let v = constant_rate_moment(l, x, 1, t).unwrap();
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_rate_ode() {
        // d/dt m_n = n m_{n-1} - theta_n m_n  (m_0 = 1)
        let (l, x, h) = (1.3, 2.0, 1e-5);
        for &t in &[0.5, 1.0, 3.0] {
            for n in 1..=3u32 {
                let d = (constant_rate_moment(l, x, n, t + h).unwrap()
                    - constant_rate_moment(l, x, n, t - h).unwrap())
                    / (2.0 * h);
                let prev = if n == 1 {
                    1.0
                } else {
                    constant_rate_moment(l, x, n - 1, t).unwrap()
                };
                let rhs = n as f64 * prev - theta(l, n) * constant_rate_moment(l, x, n, t).unwrap();
                assert!((d - rhs).abs() < 1e-6, "n={n} t={t}: {d} vs {rhs}");
            }
        }
    }

    #[test]
    fn constant_rate_rejects_bad_input() {
        assert!(constant_rate_moment(0.0, 1.0, 1, 1.0).is_err());
        assert!(constant_rate_moment(1.0, 1.0, 0, 1.0).is_err());
        assert!(constant_rate_moment(1.0, 1.0, 1, -1.0).is_err());
    }
}
