//! One-time and dynamic learning on a stable packing/covering instance.

use ro_lp::harness::{generate, permute, Family, GenSpec};
use ro_lp::learners::{run_dla, run_otl, LearnerConfig};
use ro_lp::{oracle, Block};

pub fn run_example() -> ro_lp::Result<(f64, f64)> {
    let spec = GenSpec::new(Family::PcmcStable, 80, 5.0, 2).with_shape(2, 2, 1).with_sigma0(2.0);
    let lp = generate(&spec)?;
    let opt = oracle::opt_value(&lp)?;
    let cfg = LearnerConfig::new(0.1, 0.1).with_sigma(2.0).with_c1(1.0);
    let stream: Vec<Block> = permute(&lp, 9).cloned().collect();
    let otl = run_otl(&stream, lp.b(), lp.d(), &cfg)?;
    let dla = run_dla(&stream, lp.b(), lp.d(), &cfg)?;
    for (name, sol) in [("otl", &otl), ("dla", &dla)] {
        let phases: Vec<String> = sol.phases.iter().map(|p| p.compact()).collect();
        println!(
            "{name}: value/OPT {:.4}  cover {:.3}  feasible {}  {}",
            sol.value / opt,
            sol.min_cover_ratio(),
            sol.packing_feasible(),
            phases.join(" ")
        );
    }
    Ok((otl.value / opt, dla.value / opt))
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
