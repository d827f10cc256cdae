//! Skimming high-value items and the modified learners on heavy-tailed values.

use ro_lp::harness::{generate, permute, Family, GenSpec};
use ro_lp::learners::{run_mdla, LearnerConfig};
use ro_lp::{oracle, Block};

pub fn run_example() -> ro_lp::Result<bool> {
    let lp = generate(&GenSpec::new(Family::HeavyTailPacking, 120, 20.0, 4).with_value_tail(1.2))?;
    let opt = oracle::opt_value(&lp)?;
    let tau = 2.0 * opt / lp.b().iter().cloned().fold(f64::INFINITY, f64::min);
    let skimmed = lp.skim(tau)?;
    let skim_opt = oracle::opt_value(&skimmed.lp)?;
    println!(
        "OPT {opt:.2} = skimmed {skim_opt:.2} + high-value {:.2}",
        skimmed.high_value_total(&lp)
    );
    let stream: Vec<Block> = permute(&lp, 1).cloned().collect();
    let run = run_mdla(&stream, lp.b(), &LearnerConfig::new(0.1, 0.1))?;
    println!(
        "mdla value {:.2}  feasible {}  feasible prefix {}",
        run.solution.value,
        run.solution.packing_feasible(),
        run.feasible_prefix
    );
    Ok(run.solution.packing_feasible())
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
