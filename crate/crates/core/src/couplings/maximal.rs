//! Maximal coupling of two densities on the line.

use std::fmt;
use std::sync::Arc;

use crate::analytics::tv::{tcp_jump_density, OVERLAP_TOL};
use crate::error::{usage, Error, Result};
use crate::processes::sample_tcp_jump_time;
use crate::quadrature::integrate;
use crate::rng::RngStream;

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Sampler = Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>;

/// Rejection loops give up after this many proposals.
const MAX_TRIES: u64 = 100_000_000;

/// Overlaps within this distance of 1 are treated as exactly 1.
const FULL_OVERLAP: f64 = 1e-12;

/// A probability density together with an exact sampler for it.
#[derive(Clone)]
pub struct DensitySpec {
    evaluator: Density,
    sampler: Sampler,
    support_left: f64,
    support_right: f64,
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySpec")
            .field("support_left", &self.support_left)
            .field("support_right", &self.support_right)
            .finish_non_exhaustive()
    }
}

impl DensitySpec {
    pub fn new<D, S>(evaluator: D, sampler: S, support_left: f64, support_right: f64) -> Result<Self>
    where
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(&mut RngStream) -> f64 + Send + Sync + 'static,
    {
        if !(support_left.is_finite() && support_right > support_left) {
            return usage(format!(
                "density support [{support_left}, {support_right}] is not a nonempty interval with finite left end"
            ));
        }
        Ok(Self {
            evaluator: Arc::new(evaluator),
            sampler: Arc::new(sampler),
            support_left,
            support_right,
        })
    }

    /// Law of the first jump time of the variable-rate TCP process from `x`.
    pub fn tcp_jump_time(x: f64) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return usage(format!("jump-time density needs x >= 0, got {x}"));
        }
        Self::new(
            move |s| tcp_jump_density(x, s),
            move |rng| sample_tcp_jump_time(x, rng),
            0.0,
            f64::INFINITY,
        )
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return usage(format!("uniform density needs finite a < b, got [{a}, {b}]"));
        }
        let h = 1.0 / (b - a);
        Self::new(
            move |s| if (a..=b).contains(&s) { h } else { 0.0 },
            move |rng| rng.uniform_in(a, b),
            a,
            b,
        )
    }

    /// Law of `S + shift` for `S` drawn from `self`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return usage(format!("shift must be finite, got {shift}"));
        }
        let d = self.evaluator.clone();
        let s = self.sampler.clone();
        Self::new(
            move |v| d(v - shift),
            move |rng| s(rng) + shift,
            self.support_left + shift,
            self.support_right + shift,
        )
    }

    pub fn density(&self, s: f64) -> f64 {
        if s < self.support_left || s > self.support_right {
            0.0
        } else {
            (self.evaluator)(s)
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        (self.sampler)(rng)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_left, self.support_right)
    }

    /// Checks by quadrature that the density integrates to 1 within 1e-8.
    pub fn validate(&self) -> Result<()> {
        let mass = integrate(
            |s| (self.evaluator)(s),
            self.support_left,
            self.support_right,
            1e-10,
        )?;
        if (mass - 1.0).abs() > 1e-8 {
            return usage(format!("density integrates to {mass}, not 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledDraw {
    pub first: f64,
    pub second: f64,
    pub matched: bool,
}

/// Coupling of `d1` and `d2` that maximizes the probability of a match on
/// the window `[a, b]`: matches occur with probability
/// `I = int_a^b min(d1, d2)` and never outside the window.
#[derive(Debug, Clone)]
pub struct MaximalCoupling {
    d1: DensitySpec,
    d2: DensitySpec,
    window: (f64, f64),
    overlap: f64,
}

impl MaximalCoupling {
    pub fn new(d1: DensitySpec, d2: DensitySpec, window: (f64, f64)) -> Result<Self> {
        let (a, b) = window;
        if a.is_nan() || b.is_nan() || a == f64::NEG_INFINITY {
            return usage(format!("invalid coupling window [{a}, {b}]"));
        }
        let lo = a.max(d1.support_left).max(d2.support_left);
        let hi = b.min(d1.support_right).min(d2.support_right);
        let overlap = if hi > lo {
            integrate(|s| d1.density(s).min(d2.density(s)), lo, hi, OVERLAP_TOL)?
        } else {
            0.0
        };
        if !(-OVERLAP_TOL..=1.0 + 1e-8).contains(&overlap) {
            return Err(Error::Numerical(format!(
                "overlap integral {overlap} outside [0, 1]"
            )));
        }
        let overlap = if overlap >= 1.0 - FULL_OVERLAP {
            1.0
        } else {
            overlap.max(0.0)
        };
        Ok(Self {
            d1,
            d2,
            window: (lo, hi),
            overlap,
        })
    }

    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    fn common(&self, s: f64) -> f64 {
        if s >= self.window.0 && s <= self.window.1 {
            self.d1.density(s).min(self.d2.density(s))
        } else {
            0.0
        }
    }

    /// Draws from `parent` restricted by the acceptance ratio `keep(s)`.
    fn rejection<F: Fn(f64) -> f64>(
        parent: &DensitySpec,
        keep: F,
        rng: &mut RngStream,
        what: &str,
    ) -> Result<f64> {
        for _ in 0..MAX_TRIES {
            let s = parent.sample(rng);
            let ratio = keep(s);
            if ratio >= 1.0 || rng.uniform() < ratio {
                return Ok(s);
            }
        }
        Err(Error::Numerical(format!(
            "rejection sampler for the {what} part made no acceptance in {MAX_TRIES} tries"
        )))
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<CoupledDraw> {
        if self.overlap > 0.0 && (self.overlap == 1.0 || rng.uniform() < self.overlap) {
            let s = Self::rejection(
                &self.d1,
                |s| {
                    let d = self.d1.density(s);
                    if d > 0.0 {
                        self.common(s) / d
                    } else {
                        0.0
                    }
                },
                rng,
                "common",
            )?;
            return Ok(CoupledDraw {
                first: s,
                second: s,
                matched: true,
            });
        }
        let residual = |parent: &DensitySpec, s: f64| {
            let d = parent.density(s);
            if d > 0.0 {
                ((d - self.common(s)) / d).max(0.0)
            } else {
                0.0
            }
        };
        let first = Self::rejection(&self.d1, |s| residual(&self.d1, s), rng, "first residual")?;
        let second = Self::rejection(&self.d2, |s| residual(&self.d2, s), rng, "second residual")?;
        Ok(CoupledDraw {
            first,
            second,
            matched: false,
        })
    }
}

/// Maximal coupling of `d1` and `d2` over their whole supports.
pub fn maximal_coupling_1d(
    d1: &DensitySpec,
    d2: &DensitySpec,
    rng: &mut RngStream,
) -> Result<CoupledDraw> {
    MaximalCoupling::new(d1.clone(), d2.clone(), (f64::MIN, f64::INFINITY))?.sample(rng)
}
