//! Exact offline solver for packing/covering multiple-choice LPs.
//!
//! [`solve`] maps a [`PcmcLp`] onto the general [`LinearProgram`] and returns a
//! certified primal/dual pair. The dual is the one of
//!
//! ```text
//! min ⟨α,b⟩ − ⟨β,d⟩ + Σ_t γ_t
//! s.t. ⟨A^t_{·j},α⟩ − ⟨C^t_{·j},β⟩ + γ_t ≥ π^t_j,   α, β, γ ≥ 0.
//! ```

mod simplex;

use serde::{Deserialize, Serialize};

pub use simplex::{Constraint, LinearProgram, Relation, SimplexSolution, SimplexStatus};

use crate::error::{Error, Result};
use crate::lp::{DecisionVector, PcmcLp};

/// Largest `n·k` the dense oracle accepts.
pub const MAX_VARIABLES: usize = 10_000;
/// Largest `m_p + m_c` the dense oracle accepts.
pub const MAX_ROWS: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Duals {
    /// Dual objective `⟨α,b⟩ − ⟨β,d⟩ + Σγ`.
    pub fn value(&self, lp: &PcmcLp) -> f64 {
        let a: f64 = self.alpha.iter().zip(lp.b()).map(|(x, y)| x * y).sum();
        let c: f64 = self.beta.iter().zip(lp.d()).map(|(x, y)| x * y).sum();
        a - c + self.gamma.iter().sum::<f64>()
    }

    /// Largest violation of a dual constraint over all `(t, j)`.
    pub fn max_violation(&self, lp: &PcmcLp) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, blk) in lp.blocks().iter().enumerate() {
            for j in 0..lp.k() {
                let lhs = column_price(lp, blk, j, &self.alpha, &self.beta) + self.gamma[t];
                worst = worst.max(blk.pi[j] - lhs);
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolveResult {
    pub status: LpStatus,
    pub value: f64,
    pub primal: Vec<DecisionVector>,
    pub dual: Duals,
    /// Residual infeasibility at the end of phase 1; positive iff infeasible.
    pub phase1_objective: f64,
    pub iterations: usize,
}

impl LpSolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Optimal value, or an error naming the status.
    pub fn optimal_value(&self) -> Result<f64> {
        match self.status {
            LpStatus::Optimal => Ok(self.value),
            LpStatus::Infeasible => Err(Error::Infeasible(format!(
                "phase-1 objective {:.3e}",
                self.phase1_objective
            ))),
            LpStatus::Unbounded => Err(Error::Degenerate("unbounded LP".into())),
        }
    }
}

fn column_price(lp: &PcmcLp, blk: &crate::lp::Block, j: usize, alpha: &[f64], beta: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..lp.m_p() {
        s += blk.a[i][j] * alpha[i];
    }
    for i in 0..lp.m_c() {
        s -= blk.c[i][j] * beta[i];
    }
    s
}

/// Checks the desk-scale guard without solving.
pub fn check_size(lp: &PcmcLp) -> Result<()> {
    if lp.n() * lp.k() > MAX_VARIABLES {
        return Err(Error::ResourceLimit(format!(
            "n·k = {} exceeds the oracle limit {MAX_VARIABLES}",
            lp.n() * lp.k()
        )));
    }
    if lp.m() > MAX_ROWS {
        return Err(Error::ResourceLimit(format!(
            "m_p + m_c = {} exceeds the oracle limit {MAX_ROWS}",
            lp.m()
        )));
    }
    Ok(())
}

/// Solves `lp` to optimality.
pub fn solve(lp: &PcmcLp) -> Result<LpSolveResult> {
    check_size(lp)?;
    lp.validate()?;
    let (n, k, m_p, m_c) = (lp.n(), lp.k(), lp.m_p(), lp.m_c());
    let mut prog = LinearProgram::new(n * k);
    for (t, blk) in lp.blocks().iter().enumerate() {
        prog.objective[t * k..(t + 1) * k].copy_from_slice(&blk.pi);
    }
    if k == 1 {
        prog.upper = vec![1.0; n];
    }
    for i in 0..m_p {
        let coeffs = nonzero_row(lp, |blk, j| blk.a[i][j]);
        prog.add_row(coeffs, Relation::Le, lp.b()[i]);
    }
    for i in 0..m_c {
        let coeffs = nonzero_row(lp, |blk, j| blk.c[i][j]);
        prog.add_row(coeffs, Relation::Ge, lp.d()[i]);
    }
    if k > 1 {
        for t in 0..n {
            prog.add_row((0..k).map(|j| (t * k + j, 1.0)).collect(), Relation::Le, 1.0);
        }
    }
    let sol = prog.solve()?;
    match sol.status {
        SimplexStatus::Infeasible => Ok(LpSolveResult {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            primal: Vec::new(),
            dual: Duals::default(),
            phase1_objective: sol.phase1_objective,
            iterations: sol.iterations,
        }),
        SimplexStatus::Unbounded => Err(Error::Degenerate(
            "oracle reported an unbounded PCMC LP; the objective is bounded by construction".into(),
        )),
        SimplexStatus::Optimal => {
            let primal: Vec<DecisionVector> = (0..n)
                .map(|t| {
                    let mut x = sol.x[t * k..(t + 1) * k].to_vec();
                    let s: f64 = x.iter().sum();
                    if s > 1.0 {
                        x.iter_mut().for_each(|v| *v /= s);
                    }
                    DecisionVector { x }
                })
                .collect();
            let alpha: Vec<f64> = sol.row_duals[..m_p].iter().map(|y| y.max(0.0)).collect();
            let beta: Vec<f64> = sol.row_duals[m_p..m_p + m_c].iter().map(|y| (-y).max(0.0)).collect();
            let gamma: Vec<f64> = lp
                .blocks()
                .iter()
                .map(|blk| {
                    (0..k)
                        .map(|j| blk.pi[j] - column_price(lp, blk, j, &alpha, &beta))
                        .fold(0.0, f64::max)
                })
                .collect();
            Ok(LpSolveResult {
                status: LpStatus::Optimal,
                value: lp.value_of(&primal),
                primal,
                dual: Duals { alpha, beta, gamma },
                phase1_objective: sol.phase1_objective,
                iterations: sol.iterations,
            })
        }
    }
}

fn nonzero_row(lp: &PcmcLp, entry: impl Fn(&crate::lp::Block, usize) -> f64) -> Vec<(usize, f64)> {
    let k = lp.k();
    let mut out = Vec::new();
    for (t, blk) in lp.blocks().iter().enumerate() {
        for j in 0..k {
            let v = entry(blk, j);
            if v != 0.0 {
                out.push((t * k + j, v));
            }
        }
    }
    out
}

/// Optimal value of `lp`, treating infeasibility as an error.
pub fn opt_value(lp: &PcmcLp) -> Result<f64> {
    solve(lp)?.optimal_value()
}

/// Smallest σ for which `lp` is (eps, σ)-stable:
/// `max(0, (OPT(L(1−eps))/OPT(L) − 1)/eps)`.
pub fn stability_sigma(lp: &PcmcLp, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let opt = opt_value(lp)?;
    if opt <= 0.0 {
        return Err(Error::Degenerate("OPT = 0; stability is undefined".into()));
    }
    let relaxed = opt_value(&lp.scale_covering(eps)?)?;
    Ok(((relaxed / opt - 1.0) / eps).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Block;

    fn knapsack() -> PcmcLp {
        PcmcLp::packing(&[10.0, 3.0, 1.0, 1.0], &vec![vec![1.0]; 4], vec![2.0]).unwrap()
    }

    #[test]
    fn knapsack_value_and_duals() {
        let r = solve(&knapsack()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 13.0).abs() < 1e-9);
        let x: Vec<f64> = r.primal.iter().map(|v| v.x[0]).collect();
        assert_eq!(x, vec![1.0, 1.0, 0.0, 0.0]);
        assert!((r.dual.value(&knapsack()) - 13.0).abs() < 1e-9);
        assert!(r.dual.max_violation(&knapsack()) < 1e-9);
    }

    #[test]
    fn slack_budget_takes_argmax() {
        let blocks = vec![
            Block::new(vec![1.0, 4.0, 2.0], vec![vec![1.0, 1.0, 1.0]], vec![]),
            Block::new(vec![3.0, 0.5, 0.0], vec![vec![1.0, 1.0, 1.0]], vec![]),
        ];
        let lp = PcmcLp::new(3, 1, 0, vec![100.0], vec![], blocks).unwrap();
        let r = solve(&lp).unwrap();
        assert!((r.value - 7.0).abs() < 1e-9);
        assert!((r.primal[0].x[1] - 1.0).abs() < 1e-12);
        assert!((r.primal[1].x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoverable_is_infeasible() {
        let blocks = vec![Block::new(vec![1.0], vec![], vec![vec![1.0]]); 2];
        let lp = PcmcLp::new(1, 0, 1, vec![], vec![3.0], blocks).unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(r.phase1_objective > 0.5);
        assert!(stability_sigma(&lp, 0.1).is_err());
    }

    #[test]
    fn packing_only_is_stable() {
        assert_eq!(stability_sigma(&knapsack(), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn size_guard() {
        let lp = PcmcLp::packing(&vec![1.0; 10_001], &vec![vec![1.0]; 10_001], vec![5.0]).unwrap();
        assert!(matches!(solve(&lp), Err(Error::ResourceLimit(_))));
    }
}
