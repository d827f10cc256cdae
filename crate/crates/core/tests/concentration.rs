use proptest::prelude::*;

use ro_lp::concentration::*;
use ro_lp::rng;

mod common;

fn half_ones(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect()
}

#[test]
fn bernstein_half_ones_example() {
    let pop = half_ones(1000);
    let q = TailBoundQuery::from_population(&pop, 100, 25.0).unwrap();
    assert!((q.mu - 0.5).abs() < 1e-15 && (q.sigma2 - 0.25).abs() < 1e-15);
    // 2·exp(−625 / (2·100·0.25 + 25))
    let expected = 2.0 * (-625.0f64 / 75.0).exp();
    assert!((bernstein_wor(&q) - expected).abs() < 1e-15);

    let trials = 100_000;
    let emp = simulate_wor_tail(&pop, 100, 25.0, trials, 7);
    let se = (emp * (1.0 - emp) / trials as f64).sqrt();
    println!("bernstein half-ones: bound {expected:.3e}, empirical {emp:.3e}");
    assert!(emp <= expected + 3.0 * se);
}

#[test]
fn simple_form_dominates_when_variance_is_small() {
    let mut g = common::seeded(3);
    for _ in 0..10_000 {
        let n = 10 + rng::below(&mut g, 1000) as usize;
        let s = 1 + rng::below(&mut g, n as u64) as usize;
        let m = rng::uniform(&mut g, 0.1, 10.0);
        let mu = rng::uniform(&mut g, 0.0, m);
        let sigma2 = rng::uniform(&mut g, 0.0, 2.0 * m * mu);
        let tau = rng::uniform(&mut g, 0.0, 3.0 * s as f64 * m);
        let q = TailBoundQuery::new(n, s, mu, sigma2, m, tau).unwrap();
        assert!(bernstein_wor_simple(&q) >= bernstein_wor(&q) * (1.0 - 1e-12), "{q:?}");
    }
}

#[test]
fn freedman_hand_values() {
    assert_eq!(freedman(0.0, 1.0, 1.0), 1.0);
    assert!((freedman(10.0, 5.0, 1.0) - (-100.0f64 / 30.0).exp()).abs() < 1e-15);
}

#[test]
fn maximal_bernstein_requires_half_prefix() {
    let q = TailBoundQuery::from_population(&half_ones(100), 10, 5.0).unwrap();
    assert!(maximal_bernstein(&q, 50).is_ok());
    assert!(maximal_bernstein(&q, 51).is_err());
}

#[test]
fn invalid_queries_are_rejected() {
    assert!(TailBoundQuery::new(10, 0, 0.5, 0.1, 1.0, 1.0).is_err());
    assert!(TailBoundQuery::new(10, 11, 0.5, 0.1, 1.0, 1.0).is_err());
    assert!(TailBoundQuery::new(10, 5, 0.5, -0.1, 1.0, 1.0).is_err());
    assert!(TailBoundQuery::from_population(&[1.0, -1.0], 1, 1.0).is_err());
    assert!(verify_grid(BoundKind::Freedman, 0, 0).is_err());
}

#[test]
fn simulation_is_independent_of_thread_count() {
    let pop = half_ones(1000);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                simulate_wor_tail(&pop, 100, 8.0, 20_000, 11),
                simulate_max_prefix(&pop, 200, 12.0, 20_000, 11),
                simulate_freedman(50, 1.0, 6.0, 50.0, 20_000, 11),
            )
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn small_grid_passes() {
    for kind in [BoundKind::BernsteinWor, BoundKind::Freedman] {
        let pts = verify_grid(kind, 5_000, 1).unwrap();
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(VerifierPoint::passes));
    }
}

proptest! {
    #[test]
    fn bounds_are_capped_and_monotone_in_threshold(
        s in 1usize..200, mu in 0.01f64..1.0, frac in 0.0f64..1.0, t1 in 0.0f64..50.0, dt in 0.0f64..50.0,
    ) {
        let sigma2 = frac * mu * (1.0 - mu);
        let q1 = TailBoundQuery::new(400, s, mu, sigma2, 1.0, t1).unwrap();
        let q2 = TailBoundQuery { threshold: t1 + dt, ..q1 };
        for f in [bernstein_wor, bernstein_wor_simple] {
            prop_assert!(f(&q1) <= 1.0 && f(&q1) >= 0.0);
            prop_assert!(f(&q2) <= f(&q1) + 1e-15);
        }
        let k = s.min(200);
        let (m1, m2) = (maximal_bernstein(&q1, k).unwrap(), maximal_bernstein(&q2, k).unwrap());
        prop_assert!(m1 <= 1.0 && m2 <= m1 + 1e-15);
        prop_assert!(freedman(t1 + dt, sigma2, 1.0) <= freedman(t1, sigma2, 1.0) + 1e-15);
    }
}
