//! Closed-form tail bounds next to their simulated tails.

use ro_lp::concentration::{bernstein_wor, simulate_wor_tail, verify_grid, BoundKind, TailBoundQuery};

pub fn run_example() -> ro_lp::Result<bool> {
    let population: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
    let q = TailBoundQuery::from_population(&population, 100, 15.0)?;
    let empirical = simulate_wor_tail(&population, 100, 15.0, 20_000, 1);
    println!("bound {:.5}  empirical {:.5}", bernstein_wor(&q), empirical);
    let grid = verify_grid(BoundKind::Freedman, 5_000, 2)?;
    let passed = grid.iter().filter(|p| p.passes()).count();
    println!("freedman grid: {passed}/{} points dominated", grid.len());
    Ok(passed == grid.len())
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
