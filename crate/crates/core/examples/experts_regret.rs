//! Multiplicative weights on a random payoff sequence, with its regret certificate.

use ro_lp::experts::{ExpertsState, Learner};
use ro_lp::rng;

pub fn run_example() -> ro_lp::Result<bool> {
    let (m, n, bound) = (10, 1000, 1.0);
    let eta = 0.1;
    let mut g = rng::seeded(7);
    let history: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng::uniform(&mut g, -bound, bound)).collect())
        .collect();
    let mut state = ExpertsState::init(m, eta, bound)?;
    for o in &history {
        state.observe(o)?;
    }
    let cert = state.certify(&history)?;
    println!(
        "reward {:.3}  benchmark {:.3}  regret term {:.3}  margin {:.3}",
        cert.achieved,
        cert.benchmark,
        cert.r,
        cert.margin()
    );
    Ok(cert.holds())
}

fn main() -> ro_lp::Result<()> {
    run_example().map(|_| ())
}
