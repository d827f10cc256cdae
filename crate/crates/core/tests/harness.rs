use std::fs;
use std::process::Command;

use ro_lp::harness::*;
use ro_lp::oracle;

fn knapsack_spec(n: usize) -> GenSpec {
    GenSpec::new(Family::PackingKnapsack, n, 2.0, 0)
}

#[test]
fn smallest_knapsack_is_canonical() {
    let lp = generate(&knapsack_spec(4)).unwrap();
    let values: Vec<f64> = lp.blocks().iter().map(|b| b.pi[0]).collect();
    assert_eq!(values, vec![10.0, 3.0, 1.0, 1.0]);
    assert_eq!(lp.b(), &[2.0]);
    assert!((oracle::opt_value(&lp).unwrap() - 13.0).abs() < 1e-9);
}

#[test]
fn generation_is_byte_identical_per_seed() {
    let specs = [
        GenSpec::new(Family::HeavyTailPacking, 50, 5.0, 9),
        GenSpec::new(Family::SchedulingLb, 30, 4.0, 9).with_shape(3, 2, 0),
        GenSpec::new(Family::PcmcStable, 40, 4.0, 9).with_shape(2, 2, 1),
    ];
    for spec in &specs {
        let a = generate(spec).unwrap().to_json_string().unwrap();
        let b = generate(spec).unwrap().to_json_string().unwrap();
        assert_eq!(a, b);
        let other = GenSpec { seed: 10, ..spec.clone() };
        assert_ne!(a, generate(&other).unwrap().to_json_string().unwrap());
    }
}

#[test]
fn generated_widths_are_within_a_factor_two() {
    for seed in 0..5 {
        for spec in [
            GenSpec::new(Family::HeavyTailPacking, 80, 8.0, seed).with_shape(1, 3, 0),
            GenSpec::new(Family::PcmcStable, 60, 4.0, seed).with_shape(2, 2, 2),
        ] {
            let lp = generate(&spec).unwrap();
            let w = lp.width_report(None).unwrap().width;
            assert!(w >= spec.target_width - 1e-9 && w <= 2.0 * spec.target_width + 1e-9);
        }
    }
}

#[test]
fn stable_instances_meet_their_sigma() {
    for seed in 0..5 {
        let spec = GenSpec::new(Family::PcmcStable, 60, 4.0, seed).with_shape(2, 2, 1);
        let lp = generate(&spec).unwrap();
        let sigma = oracle::stability_sigma(&lp, STABILITY_CHECK_EPS).unwrap();
        assert!(sigma <= spec.sigma0, "seed {seed}: σ = {sigma}");
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(generate(&GenSpec::new(Family::PackingKnapsack, 4, 0.0, 0)).is_err());
    assert!(generate(&GenSpec::new(Family::PackingKnapsack, 4, 2.0, 0).with_shape(2, 1, 0)).is_err());
    assert!(generate(&GenSpec::new(Family::SchedulingLb, 4, 2.0, 0).with_shape(2, 1, 1)).is_err());
    let e = generate(&GenSpec::new(Family::HeavyTailPacking, 0, 2.0, 0)).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn permutation_of_one_is_trivial() {
    let lp = generate(&GenSpec::new(Family::HeavyTailPacking, 1, 1.0, 3)).unwrap();
    let out: Vec<_> = permute(&lp, 17).collect();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0], lp.block(0));
    assert_eq!(permutation(1, 5), vec![0]);
}

#[test]
fn permutations_of_three_are_uniform() {
    let draws = 60_000u64;
    let mut counts = [0usize; 6];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for seed in 0..draws {
        let p = permutation(3, seed);
        counts[perms.iter().position(|q| q[..] == p[..]).unwrap()] += 1;
    }
    let expected = draws as f64 / 6.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9% quantile of χ² with 5 degrees of freedom
    assert!(chi2 < 20.52, "χ² = {chi2}, counts {counts:?}");
    assert_eq!(permutation(10, 4), permutation(10, 4));
}

#[test]
fn single_permutation_report() {
    let lp = generate(&knapsack_spec(40)).unwrap();
    let cfg = RunConfig::new(Algorithm::Motl, 0.1, 0.1).with_seed(3);
    let rep = experiment(&lp, &cfg).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.aggregates.runs, 1);
    assert_eq!(rep.rows[0].algo, "motl");
    assert!((rep.opt - oracle::opt_value(&lp).unwrap()).abs() < 1e-9);
}

#[test]
fn mdla_reports_no_violations_on_heavy_tails() {
    let lp = generate(&GenSpec::new(Family::HeavyTailPacking, 200, 10.0, 4)).unwrap();
    let cfg = RunConfig::new(Algorithm::Mdla, 0.1, 0.1).with_permutations(50);
    let rep = experiment(&lp, &cfg).unwrap();
    assert_eq!(rep.aggregates.errors, 0);
    assert_eq!(rep.aggregates.violation_frequency, 0.0);
    assert!(rep.rows.iter().all(|r| r.packing_feasible));
}

#[test]
fn expertlb_reports_makespans() {
    let lp = generate(&GenSpec::new(Family::SchedulingLb, 200, 4.0, 1).with_shape(3, 2, 0)).unwrap();
    let cfg = RunConfig::new(Algorithm::Expertlb, 0.1, 0.1).with_permutations(20);
    let rep = experiment(&lp, &cfg).unwrap();
    assert_eq!(rep.aggregates.errors, 0);
    for row in &rep.rows {
        assert!(row.value >= rep.opt * (1.0 - 1e-9));
        assert_eq!(row.event_ok, row.value <= (1.0 + MAKESPAN_SLACK * 0.1) * rep.opt + 1e-9);
    }
    println!("expertlb event failure frequency: {}", rep.aggregates.event_failure_frequency);
}

#[test]
fn aggregates_are_recomputed_on_load() {
    let lp = generate(&knapsack_spec(40)).unwrap();
    let cfg = RunConfig::new(Algorithm::Otl, 0.1, 0.1).with_permutations(5);
    let rep = experiment(&lp, &cfg).unwrap();
    let text = rep.to_json_string().unwrap();
    let back = RunReport::from_json_str(&text).unwrap();
    assert_eq!(back, rep);

    let mut tampered = rep.clone();
    tampered.aggregates.violation_frequency += 0.5;
    assert!(RunReport::from_json_str(&tampered.to_json_string().unwrap()).is_err());
    let mut edited = rep;
    edited.rows[0].value += 1.0;
    edited.rows[0].value_ratio = edited.rows[0].value / edited.opt;
    edited.aggregates = edited.recomputed();
    assert!(RunReport::from_json_str(&edited.to_json_string().unwrap()).is_ok());
}

#[test]
fn csv_is_deterministic() {
    let lp = generate(&GenSpec::new(Family::HeavyTailPacking, 60, 6.0, 2)).unwrap();
    let cfg = RunConfig::new(Algorithm::Dla, 0.1, 0.1).with_permutations(8).with_seed(42);
    let a = experiment(&lp, &cfg).unwrap().csv_string().unwrap();
    let b = experiment(&lp, &cfg).unwrap().csv_string().unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 9);
}

#[test]
fn config_json_defaults() {
    let cfg = RunConfig::from_json_str(r#"{"algo":"mdla","eps":0.1,"delta":0.05}"#).unwrap();
    assert_eq!(cfg, RunConfig::new(Algorithm::Mdla, 0.1, 0.05));
    assert!(RunConfig::from_json_str(r#"{"algo":"nope","eps":0.1,"delta":0.1}"#).is_err());
    assert!(RunConfig::new(Algorithm::Expertlb, 0.7, 0.1).validate().is_err());
    assert!(RunConfig::new(Algorithm::Otl, 0.1, 0.1).with_permutations(0).validate().is_err());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ro-lp"))
}

#[test]
fn cli_round_trip_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let inst = dir.path().join("inst.json");
    let cfg = dir.path().join("cfg.json");
    fs::write(&spec, r#"{"family":"heavy_tail_packing","n":60,"target_width":6.0,"seed":5}"#).unwrap();
    fs::write(&cfg, r#"{"algo":"motl","eps":0.1,"delta":0.1,"permutations":4,"seed":1}"#).unwrap();

    let st = cli().args(["gen"]).arg(&spec).arg("-o").arg(&inst).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let solved = cli().arg("solve-offline").arg(&inst).output().unwrap();
    assert_eq!(solved.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&solved.stdout).contains("Optimal"));

    let run = |threads: &str| {
        let out = cli().arg("run").arg(&inst).arg(&cfg).env(THREADS_ENV, threads).output().unwrap();
        (out.status.code(), out.stdout)
    };
    let (code, one) = run("1");
    assert_eq!(code, Some(0));
    assert_eq!(run("4").1, one);
    assert_eq!(run("0").0, Some(2));

    let audit = cli().arg("audit").arg(&inst).output().unwrap();
    assert_eq!(audit.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&audit.stdout).unwrap();
    assert!(v["opt"].as_f64().unwrap() > 0.0);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(cli().arg("solve-offline").arg(&bad).status().unwrap().code(), Some(2));
    assert_eq!(cli().arg("solve-offline").arg(dir.path().join("missing")).status().unwrap().code(), Some(2));
    fs::write(&bad, r#"{"family":"packing_knapsack","n":4,"target_width":-1}"#).unwrap();
    assert_eq!(cli().arg("gen").arg(&bad).status().unwrap().code(), Some(2));

    let big_spec = dir.path().join("big.json");
    let big = dir.path().join("big_inst.json");
    fs::write(&big_spec, r#"{"family":"packing_knapsack","n":20000,"target_width":50}"#).unwrap();
    assert_eq!(cli().arg("gen").arg(&big_spec).arg("-o").arg(&big).status().unwrap().code(), Some(0));
    assert_eq!(cli().arg("solve-offline").arg(&big).status().unwrap().code(), Some(3));
}

#[test]
fn cli_verify_bounds_small() {
    let out = cli().args(["verify-bounds", "--trials", "2000", "--seed", "3"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 100);
    assert_eq!(out.status.code(), Some(if text.contains("FAIL") { 1 } else { 0 }));
}
