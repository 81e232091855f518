use crate::couplings::{check_duration, check_state, CouplingOutcome, Pair};
use crate::error::Result;
use crate::processes::{poisson_times, ModelSpec};
use crate::rng::RngStream;

/// Shared Poisson(`alpha`) clock and shared marks except at the last jump
/// before `t`. There, with pre-jump gap `D`, the lower path draws its mark
/// `E`; if `E >= D` the upper path receives `E - D` and both land on the same
/// value (probability `e^{-D}`), otherwise the upper path draws a fresh mark.
/// By memorylessness both marks are unit exponentials.
pub fn tv_coupling_storage(
    alpha: f64,
    beta: f64,
    x: f64,
    y: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<CouplingOutcome> {
    let model = ModelSpec::storage(alpha, beta)?;
    check_state("x", x)?;
    check_state("y", y)?;
    check_duration("t", t)?;
    let mut pair = Pair::new(model, x, y);
    let times = poisson_times(alpha, 0.0, t, rng);
    let Some((&last, shared)) = times.split_last() else {
        pair.now = t;
        return Ok(pair.finish(t));
    };
    for &s in shared {
        let mark = rng.exp1();
        let vx = pair.x.state_at(s) + mark;
        let vy = pair.y.state_at(s) + mark;
        pair.x.jump_to(s, vx);
        pair.y.jump_to(s, vy);
    }
    let (a, b) = (pair.x.state_at(last), pair.y.state_at(last));
    let mark = rng.exp1();
    if pair.merged_at.is_some() {
        pair.x.jump_to(last, a + mark);
        pair.y.jump_to(last, b + mark);
    } else {
        let x_hi = a > b;
        let (hi, lo) = if x_hi {
            (&mut pair.x, &mut pair.y)
        } else {
            (&mut pair.y, &mut pair.x)
        };
        let (hi_pre, lo_pre) = if x_hi { (a, b) } else { (b, a) };
        let gap = hi_pre - lo_pre;
        let lo_post = lo_pre + mark;
        lo.jump_to(last, lo_post);
        if mark >= gap {
            // hi_pre + (mark - gap), stored as the lower path's value
            hi.jump_to(last, lo_post);
            pair.merged_at = Some(last);
        } else {
            let fresh = rng.exp1();
            hi.jump_to(last, hi_pre + fresh);
        }
    }
    pair.now = t;
    Ok(pair.finish(t))
}
