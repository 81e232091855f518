//! Adaptive Simpson quadrature with an absolute error target.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if !delta.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite integrand on [{}, {}]",
            p.a, p.b
        )));
    }
    if delta.abs() <= 15.0 * tol || (m - p.a) <= f64::EPSILON * m.abs().max(1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature did not converge on [{}, {}] (error estimate {:.3e})",
            p.a,
            p.b,
            delta.abs() / 15.0
        )));
    }
    let l = refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth - 1,
    )?;
    let r = refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth - 1,
    )?;
    Ok(l + r)
}

fn integrate_finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    // A few fixed panels first, so that narrow features are not missed by
    // the very first Simpson estimate.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for i in 0..PANELS {
        let pa = a + h * i as f64;
        let pb = if i + 1 == PANELS { b } else { pa + h };
        let fa = f(pa);
        let fm = f(0.5 * (pa + pb));
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        total += refine(
            f,
            Panel {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole,
            },
            tol / PANELS as f64,
            MAX_DEPTH,
        )?;
    }
    Ok(total)
}

/// Integrates `f` over `[a, b]` to absolute accuracy `tol`.
///
/// `b` may be `+inf`; the half-line is then mapped onto `[0, 1)` with
/// `s = a + u / (1 - u)`, which requires `f` to decay at least like `s^-2`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || a.is_nan() || b.is_nan() || a == f64::NEG_INFINITY {
        return Err(Error::Usage(format!(
            "invalid quadrature request on [{a}, {b}] with tolerance {tol}"
        )));
    }
    if b <= a {
        return Ok(0.0);
    }
    if b.is_finite() {
        return integrate_finite(&f, a, b, tol);
    }
    let mapped = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let s = a + u / w;
        if !s.is_finite() {
            return 0.0;
        }
        let v = f(s) / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_finite(&mapped, 0.0, 1.0, tol)
}
