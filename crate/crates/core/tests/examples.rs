//! Every example runs and reports something sensible.

#[allow(dead_code)]
#[path = "../examples/offline_oracle.rs"]
mod offline_oracle;
#[allow(dead_code)]
#[path = "../examples/experts_regret.rs"]
mod experts_regret;
#[allow(dead_code)]
#[path = "../examples/load_balancing.rs"]
mod load_balancing;
#[allow(dead_code)]
#[path = "../examples/lp_to_lb.rs"]
mod lp_to_lb;
#[allow(dead_code)]
#[path = "../examples/learning_phases.rs"]
mod learning_phases;
#[allow(dead_code)]
#[path = "../examples/skimming.rs"]
mod skimming;
#[allow(dead_code)]
#[path = "../examples/tail_bounds.rs"]
mod tail_bounds;
#[allow(dead_code)]
#[path = "../examples/experiment_driver.rs"]
mod experiment_driver;

#[test]
fn offline_oracle_matches_dual() {
    let (primal, dual) = offline_oracle::run_example().unwrap();
    assert!((primal - 13.0).abs() < 1e-9);
    assert!((dual - 13.0).abs() < 1e-9);
}

#[test]
fn experts_certificate_holds() {
    assert!(experts_regret::run_example().unwrap());
}

#[test]
fn load_balancing_is_near_offline() {
    let (online, offline) = load_balancing::run_example().unwrap();
    assert!(online >= offline - 1e-6);
    assert!(online <= 1.5 * offline);
}

#[test]
fn lp_to_lb_stays_feasible() {
    let (feasible, ratio) = lp_to_lb::run_example().unwrap();
    assert!(feasible);
    assert!(ratio > 0.0 && ratio <= 1.0 + 1e-9);
}

#[test]
fn learning_phases_run() {
    let (otl, dla) = learning_phases::run_example().unwrap();
    assert!(otl >= 0.0 && dla >= 0.0);
}

#[test]
fn skimming_stays_feasible() {
    assert!(skimming::run_example().unwrap());
}

#[test]
fn tail_bounds_dominate() {
    assert!(tail_bounds::run_example().unwrap());
}

#[test]
fn experiment_driver_writes_csv() {
    let csv = experiment_driver::run_example().unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("permutation,seed,algo"));
}
