mod common;

use common::{ks_critical_1pct, ks_distance, stats, z_two_sample};
use pdmp_core::analytics::{
    coalescence_bound_q, constant_rate_tv_bound, first_jump_overlap, lambda_half_closed_form,
    m_half_closed_form, plan_tv_schedule, sqrt_contraction_bound, storage_tv_bound,
    tcp_atom_lower_bound, v_tilde, contraction_constants,
};
use pdmp_core::couplings::{
    attempt_coalescence_tcp, hybrid_tv_coupling, simulate_wasserstein_coupling,
    synchronous_coupling_constant, tv_coupling_constant_rate, tv_coupling_storage, CouplingOutcome,
    DensitySpec, MaximalCoupling,
};
use pdmp_core::montecarlo::{coalescence_fraction, replicate, SummaryStats};
use pdmp_core::{simulate_path, ModelSpec, Result, RngStream};

const N: usize = 100_000;

/// First and second moments of both marginals at `t` against independent
/// single-path simulations, within 4 standard errors.
fn check_marginals<G>(model: ModelSpec, x: f64, y: f64, t: f64, seed: u64, coupled: G)
where
    G: Fn(&mut RngStream) -> Result<CouplingOutcome> + Sync,
{
    let pairs = replicate(N, seed, |rng| {
        let o = coupled(rng)?;
        Ok((o.traj_x.evaluate(t)?, o.traj_y.evaluate(t)?))
    })
    .unwrap();
    for (which, start) in [(0, x), (1, y)] {
        let reference = replicate(N, seed + 1000 + which, |rng| {
            simulate_path(&model, start, t, rng)?.evaluate(t)
        })
        .unwrap();
        let marg: Vec<f64> = pairs.iter().map(|p| if which == 0 { p.0 } else { p.1 }).collect();
        for k in [1, 2] {
            let a: Vec<f64> = marg.iter().map(|v| v.powi(k)).collect();
            let b: Vec<f64> = reference.iter().map(|v| v.powi(k)).collect();
            let z = z_two_sample(&stats(&a), &stats(&b));
            assert!(z < 4.0, "{model:?} start={start} moment {k}: z = {z}");
        }
    }
}

#[test]
fn wasserstein_coupling_preserves_marginals() {
    check_marginals(ModelSpec::TcpVariable, 2.0, 10.0, 3.0, 1, |rng| {
        simulate_wasserstein_coupling(2.0, 10.0, 3.0, rng)
    });
}

#[test]
fn coalescence_attempt_preserves_marginals() {
    check_marginals(ModelSpec::TcpVariable, 1.05, 1.0, 3.0, 2, |rng| {
        attempt_coalescence_tcp(1.05, 1.0, 3.0, rng)
    });
    check_marginals(ModelSpec::TcpVariable, 0.2, 1.4, 1.5, 3, |rng| {
        attempt_coalescence_tcp(0.2, 1.4, 1.5, rng)
    });
}

#[test]
fn hybrid_coupling_preserves_marginals() {
    check_marginals(ModelSpec::TcpVariable, 2.0, 3.0, 6.0, 4, |rng| {
        hybrid_tv_coupling(2.0, 3.0, 2.0, 1.0, 2, rng)
    });
}

#[test]
fn constant_rate_couplings_preserve_marginals() {
    let m = ModelSpec::tcp_constant(1.0).unwrap();
    check_marginals(m, 0.0, 1.0, 2.0, 5, |rng| tv_coupling_constant_rate(1.0, 0.0, 1.0, 2.0, rng));
    check_marginals(m, 0.0, 3.0, 2.0, 6, |rng| synchronous_coupling_constant(1.0, 0.0, 3.0, 2.0, rng));
}

#[test]
fn storage_coupling_preserves_marginals() {
    let m = ModelSpec::storage(1.0, 2.0).unwrap();
    check_marginals(m, 0.0, 1.0, 2.0, 7, |rng| tv_coupling_storage(1.0, 2.0, 0.0, 1.0, 2.0, rng));
    let m = ModelSpec::storage(1.0, 1.0).unwrap();
    check_marginals(m, 3.0, 0.5, 1.0, 8, |rng| tv_coupling_storage(1.0, 1.0, 3.0, 0.5, 1.0, rng));
}

fn tcp_cdf(x: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-0.5 * s * s - x * s).exp()
    }
}

#[test]
fn maximal_coupling_marginals_pass_ks() {
    let (x, y) = (1.0, 0.9);
    let delta = x - y;
    let d1 = DensitySpec::tcp_jump_time(x).unwrap();
    let d2 = DensitySpec::tcp_jump_time(y).unwrap().shifted(delta).unwrap();
    d1.validate().unwrap();
    d2.validate().unwrap();
    let coupling = MaximalCoupling::new(d1, d2, (f64::MIN, f64::INFINITY)).unwrap();
    let draws = replicate(N, 9, |rng| coupling.sample(rng)).unwrap();
    let first: Vec<f64> = draws.iter().map(|d| d.first).collect();
    let second: Vec<f64> = draws.iter().map(|d| d.second).collect();
    assert!(ks_distance(&first, |s| tcp_cdf(x, s)) < ks_critical_1pct(N));
    assert!(ks_distance(&second, |s| tcp_cdf(y, s - delta)) < ks_critical_1pct(N));
    // match frequency against the overlap integral
    let matched: Vec<f64> = draws.iter().map(|d| if d.matched { 1.0 } else { 0.0 }).collect();
    let overlap = first_jump_overlap(x, y, f64::INFINITY).unwrap();
    assert!((coupling.overlap() - overlap).abs() < 1e-9);
    let se = (overlap * (1.0 - overlap) / N as f64).sqrt();
    assert!((stats(&matched).mean - overlap).abs() < 3.0 * se);
    assert!(draws.iter().all(|d| !d.matched || d.first == d.second));
}

#[test]
fn maximal_coupling_of_uniforms_pass_ks() {
    let a = DensitySpec::uniform(0.0, 1.0).unwrap();
    let b = DensitySpec::uniform(0.4, 2.0).unwrap();
    let coupling = MaximalCoupling::new(a, b, (f64::MIN, f64::INFINITY)).unwrap();
    assert!((coupling.overlap() - 0.6 / 1.6).abs() < 1e-9);
    let draws = replicate(N, 10, |rng| coupling.sample(rng)).unwrap();
    let first: Vec<f64> = draws.iter().map(|d| d.first).collect();
    let second: Vec<f64> = draws.iter().map(|d| d.second).collect();
    assert!(ks_distance(&first, |s| s.clamp(0.0, 1.0)) < ks_critical_1pct(N));
    assert!(ks_distance(&second, |s| ((s - 0.4) / 1.6).clamp(0.0, 1.0)) < ks_critical_1pct(N));
}

#[test]
fn attempt_success_exceeds_lower_bounds() {
    let (x, y, t, eps) = (1.05, 1.0, 3.0, 0.05);
    let outs = replicate(N, 11, |rng| attempt_coalescence_tcp(x, y, t, rng)).unwrap();
    let success: Vec<f64> = outs.iter().map(|o| if o.coalesced { 1.0 } else { 0.0 }).collect();
    let s = stats(&success);
    let b = coalescence_bound_q(x, y, t, eps, x).unwrap();
    assert!(s.mean >= b.quadrature - 3.0 * s.stderr, "{} < {}", s.mean, b.quadrature);
    assert!(s.mean >= b.explicit - 3.0 * s.stderr);
    for o in &outs {
        if let Some(c) = o.coalescence_time {
            let x_end = o.traj_x.evaluate(t).unwrap();
            assert_eq!(x_end.to_bits(), o.traj_y.evaluate(t).unwrap().to_bits());
            assert!(c <= t);
        }
    }
}

#[test]
fn wasserstein_contraction_bounds() {
    let lambda = lambda_half_closed_form();
    let c = contraction_constants(0.5).unwrap();
    for &(x, y) in &[(2.0, 10.0), (0.5, 1.0), (0.0, 5.0)] {
        let outs = replicate(10_000, 12, |rng| simulate_wasserstein_coupling(x, y, 10.0, rng)).unwrap();
        for &t in &[1.0, 2.0, 5.0, 10.0] {
            let v: Vec<f64> = outs.iter().map(|o| o.distance_at(t).unwrap().sqrt()).collect();
            let s = stats(&v);
            assert!(s.mean <= sqrt_contraction_bound(t, x, y) + 3.0 * s.stderr, "({x},{y}) t={t}");
            let vt: Vec<f64> = outs
                .iter()
                .map(|o| {
                    let st = o.state_at(t).unwrap();
                    v_tilde(st.x, st.y, c.alpha, c.x0)
                })
                .collect();
            let s = stats(&vt);
            let bound = (-lambda * t).exp() * v_tilde(x, y, c.alpha, c.x0);
            assert!(s.mean <= bound + 3.0 * s.stderr, "V-tilde ({x},{y}) t={t}");
        }
    }
    assert!((1.0 / m_half_closed_form().sqrt() * 8f64.sqrt() - 3.0924).abs() < 1e-4);
}

#[test]
fn synchronous_gap_law_pathwise() {
    let outs = replicate(10_000, 13, |rng| synchronous_coupling_constant(1.0, 0.0, 8.0, 3.0, rng)).unwrap();
    for o in &outs {
        let times = o.traj_x.jump_times();
        assert_eq!(times, o.traj_y.jump_times());
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            let n = times.partition_point(|&s| s <= t) as i32;
            let want = 8.0 * 2f64.powi(-n);
            assert!((o.distance_at(t).unwrap() - want).abs() <= 1e-12 * (8.0 + t));
        }
    }
    let d: Vec<f64> = replicate(N, 14, |rng| {
        synchronous_coupling_constant(2.0, 0.0, 1.0, 2.0, rng)?.distance_at(2.0)
    })
    .unwrap();
    let s = stats(&d);
    assert!((s.mean - (-2.0f64).exp()).abs() <= 3.0 * s.stderr);
}

fn non_coalescence(outs: &[CouplingOutcome]) -> SummaryStats {
    coalescence_fraction(outs).unwrap()
}

#[test]
fn constant_rate_tv_sandwich() {
    for &(x, y, t) in &[(0.0, 1.0, 4.0), (0.0, 3.0, 2.0), (2.0, 1.5, 1.0)] {
        let outs = replicate(N, 15, |rng| tv_coupling_constant_rate(1.0, x, y, t, rng)).unwrap();
        let s = non_coalescence(&outs);
        assert!(s.mean <= constant_rate_tv_bound(1.0, x, y, t) + 3.0 * s.stderr);
        assert!(s.mean >= (-t).exp() - 3.0 * s.stderr);
    }
}

#[test]
fn storage_tv_bounds() {
    for &(a, b) in &[(1.0, 2.0), (1.0, 1.0), (2.0, 0.5)] {
        let outs = replicate(N, 16, |rng| tv_coupling_storage(a, b, 0.0, 1.0, 2.0, rng)).unwrap();
        let s = non_coalescence(&outs);
        assert!(s.mean <= storage_tv_bound(a, b, 0.0, 1.0, 2.0) + 3.0 * s.stderr, "({a},{b})");
        assert!(s.mean >= (-2.0 * a).exp() - 3.0 * s.stderr);
    }
}

#[test]
fn hybrid_sandwich_and_rounds() {
    let (x, y) = (1.01, 1.0);
    let outs = replicate(10_000, 17, |rng| hybrid_tv_coupling(x, y, 1.0, 1.0, 1, rng)).unwrap();
    let s = non_coalescence(&outs);
    assert!(s.mean >= tcp_atom_lower_bound(x, y, 2.0) - 3.0 * s.stderr);

    let sched = plan_tv_schedule(15.0, 1.0).unwrap();
    let one = replicate(10_000, 18, |rng| hybrid_tv_coupling(2.0, 10.0, sched.t1, sched.t2, 1, rng)).unwrap();
    let three = replicate(10_000, 18, |rng| hybrid_tv_coupling(2.0, 10.0, sched.t1, sched.t2, 3, rng)).unwrap();
    for (a, b) in one.iter().zip(&three) {
        // same streams: a success in the first round is a success for both
        assert!(!a.coalesced || b.coalesced);
    }
    assert!(non_coalescence(&three).mean <= non_coalescence(&one).mean);
}
