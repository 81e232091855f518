mod common;

use common::{stats, z_two_sample};
use pdmp_core::analytics::{
    deviation_bounds, invariant_density, wasserstein_moment_bound,
};
use pdmp_core::montecarlo::{mc_expectation, replicate};
use pdmp_core::processes::tcp_survival;
use pdmp_core::quadrature::integrate;
use pdmp_core::{simulate_path, ModelSpec, RngStream};

#[test]
fn first_jump_survival_matches_closed_form() {
    let n = 100_000;
    for &x in &[0.0, 1.0, 3.0] {
        let firsts = replicate(n, 21, |rng| {
            let tr = simulate_path(&ModelSpec::TcpVariable, x, 5.0, rng)?;
            Ok(tr.jump_times().first().copied().unwrap_or(f64::INFINITY))
        })
        .unwrap();
        for &t in &[0.25, 0.5, 1.0, 2.0] {
            let v: Vec<f64> = firsts.iter().map(|&s| if s > t { 1.0 } else { 0.0 }).collect();
            let s = stats(&v);
            let p = tcp_survival(x, t);
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-12);
            assert!((s.mean - p).abs() < 4.0 * se, "x={x} t={t}: {} vs {p}", s.mean);
        }
    }
}

#[test]
fn moment_bound_dominates_simulation() {
    for &x in &[0.0, 1.0, 5.0, 20.0] {
        for &t in &[0.5, 1.0, 2.0, 5.0] {
            for &p in &[1.0, 2.0, 3.0] {
                let s = mc_expectation(
                    20_000,
                    31,
                    |rng| simulate_path(&ModelSpec::TcpVariable, x, t, rng),
                    |tr| Ok(tr.evaluate(t)?.powf(p)),
                )
                .unwrap();
                let bound = wasserstein_moment_bound(p, t).unwrap();
                assert!(s.mean - 3.0 * s.stderr <= bound, "x={x} t={t} p={p}: {} > {bound}", s.mean);
            }
        }
    }
}

#[test]
fn finite_time_deviation_bound_dominates_simulation() {
    for &x in &[0.0, 2.0, 10.0] {
        for &t in &[0.5, 1.0, 3.0] {
            let finals = replicate(20_000, 41, |rng| {
                simulate_path(&ModelSpec::TcpVariable, x, t, rng)?.evaluate(t)
            })
            .unwrap();
            for &k in &[1.0, 1.2, 1.5] {
                let d = deviation_bounds(t, k * 2.0 * std::f64::consts::E * (1.0 + 1.0 / t)).unwrap();
                let r = k * 2.0 * std::f64::consts::E * (1.0 + 1.0 / t);
                assert!(d.finite_time_valid);
                let v: Vec<f64> = finals.iter().map(|&v| if v > r { 1.0 } else { 0.0 }).collect();
                let s = stats(&v);
                assert!(s.mean - 3.0 * s.stderr <= d.finite_time, "x={x} t={t} r={r}");
            }
        }
    }
}

#[test]
fn stationary_deviation_bound_dominates_invariant_tail() {
    for i in 0..20 {
        let r = (2.0 * std::f64::consts::E).sqrt() + 0.25 * i as f64;
        let tail = integrate(|s| invariant_density(s, 1e-14), r, f64::INFINITY, 1e-13).unwrap();
        let d = deviation_bounds(1.0, r).unwrap();
        assert!(d.stationary_valid);
        assert!(tail <= d.stationary, "r={r}: {tail} > {}", d.stationary);
    }
}

#[test]
fn storage_mean_matches_closed_form() {
    let (alpha, beta, x) = (1.0, 2.0, 3.0);
    let m = ModelSpec::storage(alpha, beta).unwrap();
    for &t in &[0.5, 1.0, 3.0] {
        let s = mc_expectation(100_000, 51, |rng| simulate_path(&m, x, t, rng), |tr| tr.evaluate(t))
            .unwrap();
        let want = alpha / beta + (x - alpha / beta) * (-beta * t).exp();
        assert!((s.mean - want).abs() <= 3.0 * s.stderr, "t={t}: {} vs {want}", s.mean);
    }
}

#[test]
fn independent_seeds_agree_statistically() {
    let run = |seed| {
        mc_expectation(
            50_000,
            seed,
            |rng| simulate_path(&ModelSpec::TcpVariable, 1.0, 4.0, rng),
            |tr| tr.evaluate(4.0),
        )
        .unwrap()
    };
    assert!(z_two_sample(&run(1), &run(2)) < 4.0);
}

#[test]
fn reruns_are_bit_identical() {
    let path = |id| simulate_path(&ModelSpec::tcp_constant(1.5).unwrap(), 0.2, 40.0, &mut RngStream::new(77, id)).unwrap();
    for id in 0..20 {
        assert_eq!(path(id), path(id));
    }
}
