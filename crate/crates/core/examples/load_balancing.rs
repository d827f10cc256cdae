//! Online fractional load balancing against the offline optimal makespan.

use ro_lp::load_balancer::{offline_makespan, run_expert_lb, LoadInstance};
use ro_lp::rng;

pub fn run_example() -> ro_lp::Result<(f64, f64)> {
    let (n, machines, choices) = (300, 3, 3);
    let mut g = rng::seeded(11);
    let mats: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..machines)
                .map(|_| (0..choices).map(|_| rng::uniform(&mut g, 0.5, 1.0)).collect())
                .collect()
        })
        .collect();
    let inst = LoadInstance::new(mats)?;
    let lambda = offline_makespan(&inst)?;
    let run = run_expert_lb(inst.mats(), inst.max_abs_entry(), 0.1)?;
    println!("online makespan {:.3}  offline {:.3}  ratio {:.4}", run.makespan, lambda, run.makespan / lambda);
    Ok((run.makespan, lambda))
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
