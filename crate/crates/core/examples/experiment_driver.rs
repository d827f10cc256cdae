//! A seeded Monte-Carlo batch over random arrival orders, written as CSV.

use ro_lp::harness::{experiment, generate, Algorithm, Family, GenSpec, RunConfig};

pub fn run_example() -> ro_lp::Result<String> {
    let lp = generate(&GenSpec::new(Family::HeavyTailPacking, 100, 20.0, 8))?;
    let cfg = RunConfig::new(Algorithm::Mdla, 0.1, 0.1).with_seed(42).with_permutations(8);
    let report = experiment(&lp, &cfg)?;
    let agg = &report.aggregates;
    println!(
        "runs {}  errors {}  violations {}  mean value/OPT {:?}",
        agg.runs, agg.errors, agg.violation_frequency, agg.mean_value_ratio
    );
    let csv = report.csv_string()?;
    print!("{csv}");
    Ok(csv)
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
