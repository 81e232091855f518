use serde::Serialize;

use crate::couplings::CouplingOutcome;
use crate::error::{usage, Error, Result};
use crate::montecarlo::{pairwise_sum, SummaryStats, DEFAULT_MULTIPLIER};

fn sorted_pair(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.is_empty() || a.len() != b.len() {
        return usage(format!(
            "empirical distances need two nonempty samples of equal size, got {} and {}",
            a.len(),
            b.len()
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("empirical distance of non-finite samples".to_string()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok((a, b))
}

/// W1 between two empirical measures of equal size: the mean absolute
/// difference of their order statistics. Inputs need not be sorted.
pub fn empirical_w1(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = sorted_pair(a, b)?;
    let d: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).collect();
    Ok(pairwise_sum(&d) / d.len() as f64)
}

/// Wp between two empirical measures of equal size, through the comonotone
/// (order-statistics) coupling, which is optimal on the line.
pub fn empirical_wp(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return usage(format!("Wasserstein order must be finite and >= 1, got {p}"));
    }
    if p == 1.0 {
        return empirical_w1(a, b);
    }
    let (a, b) = sorted_pair(a, b)?;
    let d: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (u - v).abs().powf(p)).collect();
    Ok((pairwise_sum(&d) / d.len() as f64).powf(1.0 / p))
}

/// Fraction of couplings that have not merged by their horizon; its upper
/// confidence limit bounds the total-variation distance.
pub fn coalescence_fraction(outcomes: &[CouplingOutcome]) -> Result<SummaryStats> {
    let v: Vec<f64> = outcomes
        .iter()
        .map(|o| if o.coalesced { 0.0 } else { 1.0 })
        .collect();
    SummaryStats::from_values(&v, DEFAULT_MULTIPLIER)
}

/// Fraction of couplings that have not merged by time `t`.
pub fn coalescence_fraction_at(outcomes: &[CouplingOutcome], t: f64) -> Result<SummaryStats> {
    let v: Vec<f64> = outcomes
        .iter()
        .map(|o| if o.not_coalesced_by(t) { 1.0 } else { 0.0 })
        .collect();
    SummaryStats::from_values(&v, DEFAULT_MULTIPLIER)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `ln(estimate)` against `t`: minus the decay rate.
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// Points inside the window dropped for a nonpositive estimate.
    pub dropped: usize,
}

/// Least squares fit of `ln(estimate) = intercept + slope t` over the points
/// with `t` in `window`.
pub fn fit_exponential_rate(points: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return usage(format!("regression window [{lo}, {hi}] is empty"));
    }
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect();
    let kept: Vec<(f64, f64)> = inside
        .iter()
        .filter(|&&(_, v)| v > 0.0 && v.is_finite())
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    let dropped = inside.len() - kept.len();
    let n = kept.len();
    if n < 3 {
        return Err(Error::Numerical(format!(
            "regression needs 3 positive points in [{lo}, {hi}], found {n} ({dropped} dropped)"
        )));
    }
    let nf = n as f64;
    let tm = kept.iter().map(|p| p.0).sum::<f64>() / nf;
    let ym = kept.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = kept.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("regression times are all equal".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ssr: f64 = kept
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFit {
        slope,
        intercept,
        slope_stderr,
        window,
        n_points: n,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w1_examples() {
        assert_eq!(empirical_w1(&[0.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(empirical_w1(&[3.0, 1.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert!(empirical_w1(&[1.0], &[1.0, 2.0]).is_err());
        assert!(empirical_w1(&[], &[]).is_err());
    }

    #[test]
    fn wp_examples() {
        assert_eq!(empirical_wp(&[0.0, 0.0], &[1.0, 1.0], 2.0).unwrap(), 1.0);
        let a = [0.3, 1.7, 2.2];
        let b = [0.1, 0.4, 5.0];
        assert_eq!(empirical_wp(&a, &b, 1.0).unwrap(), empirical_w1(&a, &b).unwrap());
        assert!(empirical_wp(&a, &b, 0.5).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 0.5 * i as f64;
                (t, 5.0 * (-0.3 * t).exp())
            })
            .collect();
        let f = fit_exponential_rate(&pts, (0.0, 10.0)).unwrap();
        assert!((f.slope + 0.3).abs() < 1e-12);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-12);
        assert_eq!(f.n_points, 20);
    }

    #[test]
    fn fit_drops_nonpositive() {
        let pts = [(1.0, 1.0), (2.0, 0.5), (3.0, -0.1), (4.0, 0.125), (5.0, 0.0)];
        let f = fit_exponential_rate(&pts, (0.0, 10.0)).unwrap();
        assert_eq!(f.dropped, 2);
        assert_eq!(f.n_points, 3);
        assert!(fit_exponential_rate(&pts[..3], (0.0, 10.0)).is_err());
    }
}
