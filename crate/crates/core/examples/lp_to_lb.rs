//! The reduction from online LP to load balancing, given an OPT estimate.

use ro_lp::harness::{generate, permute, Family, GenSpec};
use ro_lp::oracle;
use ro_lp::reduction::{run_lp_to_lb, LpToLbConfig, PayoffBound};
use ro_lp::Block;

pub fn run_example() -> ro_lp::Result<(bool, f64)> {
    let lp = generate(&GenSpec::new(Family::PackingKnapsack, 200, 50.0, 0))?;
    let opt = oracle::opt_value(&lp)?;
    let width = lp.width_report(Some(opt))?.generalized_width;
    let eps = 0.05;
    let cfg = LpToLbConfig::new(opt, eps, eps)
        .with_eps0(eps)
        .with_c1(1.0)
        .with_payoff(PayoffBound::Width(width));
    let stream: Vec<Block> = permute(&lp, 3).cloned().collect();
    let (sol, run) = run_lp_to_lb(&stream, &cfg, lp.b(), lp.d())?;
    println!(
        "value {:.2} of OPT {opt:.2}  scale {:.3}  feasible {}",
        sol.value,
        run.scale,
        sol.packing_feasible()
    );
    Ok((sol.packing_feasible(), sol.value / opt))
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
