mod common;

use common::{knapsack, random_packing, seeded};
use proptest::prelude::*;
use ro_lp::lp::LimitingCoordinate;
use ro_lp::rng;
use ro_lp::{oracle, Block, DecisionVector, PcmcLp};

fn grid_best(values: &[f64; 2], cap: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
            if x + y <= cap + 1e-12 {
                best = best.max(values[0] * x + values[1] * y);
            }
        }
    }
    best
}

#[test]
fn restricted_knapsack_matches_grid_search() {
    let r = knapsack().restrict(&[0, 2]).unwrap();
    assert_eq!(r.b(), &[1.0]);
    let lp_opt = oracle::opt_value(&r).unwrap();
    assert!((lp_opt - grid_best(&[10.0, 1.0], 1.0)).abs() < 1e-9);
    assert!((lp_opt - 10.0).abs() < 1e-9);
}

fn scan_width(lp: &PcmcLp, opt: Option<f64>) -> (f64, f64) {
    let mut w = f64::INFINITY;
    for t in 0..lp.n() {
        let blk = lp.block(t);
        for i in 0..lp.m_p() {
            for j in 0..lp.k() {
                if blk.a[i][j] > 0.0 {
                    w = w.min(lp.b()[i] / blk.a[i][j]);
                }
            }
        }
        for i in 0..lp.m_c() {
            for j in 0..lp.k() {
                if blk.c[i][j] > 0.0 {
                    w = w.min(lp.d()[i] / blk.c[i][j]);
                }
            }
        }
    }
    let mut gw = w;
    if let Some(o) = opt {
        for t in 0..lp.n() {
            for &p in &lp.block(t).pi {
                if p > 0.0 {
                    gw = gw.min(o / p);
                }
            }
        }
    }
    (w, gw)
}

#[test]
fn width_report_matches_exhaustive_scan() {
    let mut g = seeded(21);
    for _ in 0..20 {
        let lp = common::random_pcmc(&mut g, 15, 3, 2, 1);
        let opt = oracle::opt_value(&lp).unwrap();
        let rep = lp.width_report(Some(opt)).unwrap();
        let (w, gw) = scan_width(&lp, Some(opt));
        assert_eq!(rep.width, w);
        assert_eq!(rep.generalized_width, gw);
        assert_ne!(rep.limiting_coordinate, LimitingCoordinate::Unbounded);
    }
}

#[test]
fn knapsack_skim_confirms_threshold_identity() {
    let lp = knapsack();
    let s = lp.skim(6.5).unwrap();
    assert_eq!(s.high_value, vec![0]);
    assert_eq!(s.lp.b(), &[1.0]);
    let skim_opt = oracle::opt_value(&s.lp).unwrap();
    assert!((skim_opt - 3.0).abs() < 1e-9);
    assert!((skim_opt + s.high_value_total(&lp) - oracle::opt_value(&lp).unwrap()).abs() < 1e-9);
}

#[test]
fn skim_extremes() {
    let lp = knapsack();
    let none = lp.skim(10.0).unwrap();
    assert!(none.high_value.is_empty());
    assert_eq!(none.lp, lp);
    let all = lp.skim(-1.0).unwrap();
    assert_eq!(all.high_value, vec![0, 1, 2, 3]);
    assert_eq!(all.lp.b(), &[-2.0]);
    assert_eq!(all.negative_rhs_rows, vec![0]);
    assert!(all.lp.blocks().iter().all(|b| b.pi == vec![0.0]));
}

#[test]
fn drop_top_two_leaves_value_two() {
    let lp = knapsack();
    assert_eq!(lp.drop_top_k(0).unwrap(), lp);
    let dropped = lp.drop_top_k(2).unwrap();
    assert!((oracle::opt_value(&dropped).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn good_threshold_on_knapsack() {
    let lp = knapsack();
    let rep = lp.check_good_threshold(6.5, 13.0, 0.0, 1.0).unwrap();
    assert!(rep.s1 && rep.s2 && rep.s3);
    assert_eq!(rep.skim_opt.map(|v| v.round()), Some(3.0));
    let top = lp.check_good_threshold(10.0, 13.0, 0.0, 1.0).unwrap();
    assert!(top.s1 && top.s2);
    let full = lp.check_good_threshold(-1.0, 13.0, 0.0, 1.0).unwrap();
    assert!(!full.s2);
    assert!(!full.s1);
}

#[test]
fn scale_covering_keeps_feasible_points() {
    let mut g = seeded(3);
    let lp = common::random_pcmc(&mut g, 10, 2, 1, 2);
    let res = oracle::solve(&lp).unwrap();
    for eps in [0.0, 0.1, 0.5, 0.99] {
        let scaled = lp.scale_covering(eps).unwrap();
        assert!(scaled.is_feasible(&res.primal));
    }
    assert_eq!(lp.scale_covering(0.0).unwrap(), lp);
}

fn small_lp() -> impl Strategy<Value = PcmcLp> {
    (2usize..8, 1usize..3, 0u64..1000).prop_map(|(n, m, seed)| random_packing(&mut seeded(seed), n, m, 5.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restrict_composes(lp in small_lp(), seed in 0u64..1000) {
        let mut g = rng::seeded(seed);
        let n = lp.n();
        let size_i = 1 + rng::below(&mut g, n as u64) as usize;
        let i = rng::sample_indices(&mut g, n, size_i);
        let size_j = 1 + rng::below(&mut g, i.len() as u64) as usize;
        let j = rng::sample_indices(&mut g, i.len(), size_j);
        let twice = lp.restrict(&i).unwrap().restrict(&j).unwrap();
        let composed: Vec<usize> = j.iter().map(|&p| i[p]).collect();
        let once = lp.restrict(&composed).unwrap();
        prop_assert_eq!(twice.blocks(), once.blocks());
        for (a, b) in twice.b().iter().zip(once.b()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_threshold_identity(lp in small_lp(), stretch in 1.0f64..3.0) {
        let opt = oracle::opt_value(&lp).unwrap();
        let min_b = lp.b().iter().cloned().fold(f64::INFINITY, f64::min);
        let tau = stretch * opt / min_b;
        let s = lp.skim(tau).unwrap();
        let total = oracle::opt_value(&s.lp).unwrap() + s.high_value_total(&lp);
        prop_assert!((total - opt).abs() <= 1e-6 * opt.max(1.0));
    }

    #[test]
    fn scaled_feasible_iff_eps_feasible(seed in 0u64..1000, eps in 0.0f64..0.9) {
        let mut g = rng::seeded(seed);
        let lp = common::random_pcmc(&mut g, 6, 2, 1, 2);
        let x: Vec<DecisionVector> = (0..6)
            .map(|_| {
                let a = rng::uniform01(&mut g);
                let b = rng::uniform(&mut g, 0.0, 1.0 - a);
                DecisionVector { x: vec![a, b] }
            })
            .collect();
        prop_assert_eq!(lp.scale_covering(eps).unwrap().is_feasible(&x), lp.is_eps_feasible(&x, eps));
    }

    #[test]
    fn width_equals_scan(seed in 0u64..1000) {
        let lp = common::random_pcmc(&mut rng::seeded(seed), 8, 2, 3, 1);
        let rep = lp.width_report(None).unwrap();
        prop_assert_eq!(rep.width, scan_width(&lp, None).0);
    }
}

#[test]
fn json_round_trip_preserves_blocks() {
    let lp = PcmcLp::new(2, 1, 0, vec![3.0], vec![], vec![Block::new(vec![1.0, 2.0], vec![vec![0.5, 1.0]], vec![])]).unwrap();
    let back = PcmcLp::from_json_str(&lp.to_json_string().unwrap()).unwrap();
    assert_eq!(back, lp);
}
