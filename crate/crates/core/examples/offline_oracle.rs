//! Solve a small knapsack with the dense simplex oracle and read off its duals.

use ro_lp::oracle;
use ro_lp::PcmcLp;

pub fn run_example() -> ro_lp::Result<(f64, f64)> {
    let lp = PcmcLp::packing(&[10.0, 3.0, 1.0, 1.0], &vec![vec![1.0]; 4], vec![2.0])?;
    let res = oracle::solve(&lp)?;
    let taken: Vec<f64> = res.primal.iter().map(|x| x.x[0]).collect();
    println!("OPT = {}  x = {taken:?}", res.value);
    println!("alpha = {:?}  gamma = {:?}", res.dual.alpha, res.dual.gamma);
    Ok((res.value, res.dual.value(&lp)))
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
