//! Dense two-phase primal simplex with implicit variable upper bounds.
//!
//! Solves `max cᵀx` subject to linear rows (`≤`, `≥`, `=`) and
//! `0 ≤ x_j ≤ u_j` (`u_j` may be infinite). The tableau is kept explicitly as
//! `B⁻¹[A | I]`; nonbasic variables sit at one of their bounds. Pricing is
//! Dantzig's largest reduced cost, switching to Bland's smallest-index rule
//! while a run of degenerate pivots is in progress.

use rayon::prelude::*;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const OPT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 50;
const MAX_TABLEAU_CELLS: usize = 60_000_000;
const PAR_CELLS: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    /// Sparse coefficients `(variable, value)`.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    /// Maximized.
    pub objective: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub status: SimplexStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row multipliers `y` with `c − Aᵀy` dual-feasible at the optimum:
    /// `y ≥ 0` on `≤` rows, `y ≤ 0` on `≥` rows.
    pub row_duals: Vec<f64>,
    /// Reduced costs `c_j − yᵀA_j` of the structural variables.
    pub reduced_costs: Vec<f64>,
    /// Sum of artificial values left after phase 1 (0 when feasible).
    pub phase1_objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<SimplexSolution> {
        Tableau::build(self)?.run(self)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`.
    t: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    kind: Vec<ColKind>,
    /// Column holding `B⁻¹ e_i` (up to the sign in `row_sign`).
    unit_col: Vec<usize>,
    /// +1 or −1: the sign applied to row `i` to make its rhs nonnegative.
    row_sign: Vec<f64>,
    /// Reduced costs of the current phase.
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n = lp.num_vars();
        if lp.upper.len() != n {
            return Err(Error::invalid("upper-bound vector length mismatch"));
        }
        if lp.objective.iter().chain(&lp.upper).any(|v| v.is_nan()) {
            return Err(Error::invalid("NaN in objective or bounds"));
        }
        if lp.upper.iter().any(|&u| u < 0.0) {
            return Err(Error::invalid("negative upper bound"));
        }
        let rows = lp.rows.len();
        let mut slack_count = 0;
        let mut art_count = 0;
        let mut row_sign = Vec::with_capacity(rows);
        let mut rel = Vec::with_capacity(rows);
        for r in &lp.rows {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|(j, v)| *j >= n || !v.is_finite()) {
                return Err(Error::invalid("non-finite coefficient or out-of-range variable in constraint"));
            }
            let sign = if r.rhs < 0.0 { -1.0 } else { 1.0 };
            let relation = match (r.relation, sign < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (rel, _) => rel,
            };
            match relation {
                Relation::Le => slack_count += 1,
                Relation::Ge => {
                    slack_count += 1;
                    art_count += 1
                }
                Relation::Eq => art_count += 1,
            }
            row_sign.push(sign);
            rel.push(relation);
        }
        let cols = n + slack_count + art_count;
        if rows.saturating_mul(cols) > MAX_TABLEAU_CELLS {
            return Err(Error::ResourceLimit(format!("dense tableau of {rows}x{cols} exceeds the desk-scale limit")));
        }
        let mut t = vec![0.0; rows * cols];
        let mut kind = vec![ColKind::Structural; cols];
        let mut upper = lp.upper.clone();
        upper.resize(cols, f64::INFINITY);
        let mut basis = vec![0; rows];
        let mut unit_col = vec![0; rows];
        let mut beta = vec![0.0; rows];
        let mut next_slack = n;
        let mut next_art = n + slack_count;
        for (i, r) in lp.rows.iter().enumerate() {
            let row = &mut t[i * cols..(i + 1) * cols];
            for &(j, v) in &r.coeffs {
                row[j] += row_sign[i] * v;
            }
            beta[i] = row_sign[i] * r.rhs;
            match rel[i] {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    kind[next_slack] = ColKind::Slack;
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    kind[next_slack] = ColKind::Slack;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    kind[next_art] = ColKind::Artificial;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    kind[next_art] = ColKind::Artificial;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let mut is_basic = vec![false; cols];
        for &j in &basis {
            is_basic[j] = true;
        }
        let max_iterations = 50 * (rows + cols) + 10_000;
        Ok(Tableau {
            rows,
            cols,
            t,
            beta,
            basis,
            is_basic,
            at_upper: vec![false; cols],
            upper,
            kind,
            unit_col,
            row_sign,
            d: vec![0.0; cols],
            iterations: 0,
            max_iterations,
        })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.cols..(i + 1) * self.cols]
    }

    /// Reduced costs `c_j − c_Bᵀ B⁻¹ A_j` for cost vector `cost` (length cols).
    fn price(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for i in 0..self.rows {
            d[self.basis[i]] = 0.0;
        }
        self.d = d;
    }

    fn current_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    /// Chooses an entering column and its direction (+1 increase, −1 decrease).
    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.is_basic[j] || self.upper[j] == 0.0 {
                continue;
            }
            let dj = self.d[j];
            let dir = if !self.at_upper[j] && dj > OPT_TOL {
                1.0
            } else if self.at_upper[j] && dj < -OPT_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| dj.abs() > s) {
                best = Some((j, dir, dj.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Pivots on `(r, q)`: column `q` enters at row `r`.
    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let piv = self.t[r * cols + q];
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            row.iter_mut().for_each(|v| *v /= piv);
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        let nz: Vec<usize> = pivot_row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect();
        let update = |(i, row): (usize, &mut [f64])| {
            if i == r {
                return;
            }
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * pivot_row[j];
                }
                row[q] = 0.0;
            }
        };
        if self.rows * cols >= PAR_CELLS {
            self.t.par_chunks_mut(cols).enumerate().for_each(update);
        } else {
            self.t.chunks_mut(cols).enumerate().for_each(update);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
    }

    /// Runs simplex iterations on the current cost until optimal or unbounded.
    /// Returns false when unbounded.
    fn optimize(&mut self) -> Result<bool> {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::ResourceLimit(format!("simplex exceeded {} iterations", self.max_iterations)));
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(true);
            };
            self.iterations += 1;
            // Ratio test. Basic value i moves by −dir·α_i·θ.
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None; // (row, leaves at upper)
            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * alpha;
                let bi = self.basis[i];
                let (limit, to_upper) = if delta < 0.0 {
                    (self.beta[i].max(0.0) / -delta, false)
                } else if self.upper[bi].is_finite() {
                    ((self.upper[bi] - self.beta[i]).max(0.0) / delta, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < theta,
                    Some((l, _)) => {
                        limit < theta - 1e-12
                            || (limit <= theta + 1e-12
                                && if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    alpha.abs() > self.t[l * self.cols + q].abs()
                                })
                    }
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                }
            }
            if theta.is_infinite() {
                return Ok(false);
            }
            degenerate = if theta <= 1e-12 { degenerate + 1 } else { 0 };
            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + q];
                if alpha != 0.0 {
                    self.beta[i] -= dir * alpha * theta;
                }
            }
            let entering_value = self.current_value(q) + dir * theta;
            match leave {
                None => {
                    // Bound flip.
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.pivot(r, q);
                    self.is_basic[out] = false;
                    self.at_upper[out] = to_upper;
                    self.basis[r] = q;
                    self.is_basic[q] = true;
                    self.at_upper[q] = false;
                    self.beta[r] = entering_value;
                }
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<SimplexSolution> {
        let n = lp.num_vars();
        // Phase 1: maximize −Σ artificials.
        let phase1_cost: Vec<f64> = self
            .kind
            .iter()
            .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        let has_artificials = phase1_cost.iter().any(|&c| c != 0.0);
        let mut phase1_objective = 0.0;
        if has_artificials {
            self.price(&phase1_cost);
            self.optimize()?;
            phase1_objective = (0..self.rows)
                .filter(|&i| self.kind[self.basis[i]] == ColKind::Artificial)
                .map(|i| self.beta[i].max(0.0))
                .sum();
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if phase1_objective > FEAS_TOL * scale {
                return Ok(SimplexSolution {
                    status: SimplexStatus::Infeasible,
                    objective: 0.0,
                    x: Vec::new(),
                    row_duals: Vec::new(),
                    reduced_costs: Vec::new(),
                    phase1_objective,
                    iterations: self.iterations,
                });
            }
            // Pin artificials at zero for phase 2.
            for j in 0..self.cols {
                if self.kind[j] == ColKind::Artificial {
                    self.upper[j] = 0.0;
                    self.at_upper[j] = false;
                }
            }
            for i in 0..self.rows {
                if self.kind[self.basis[i]] == ColKind::Artificial {
                    self.beta[i] = 0.0;
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..n].copy_from_slice(&lp.objective);
        self.price(&cost);
        let bounded = self.optimize()?;
        if !bounded {
            return Ok(SimplexSolution {
                status: SimplexStatus::Unbounded,
                objective: f64::INFINITY,
                x: Vec::new(),
                row_duals: Vec::new(),
                reduced_costs: Vec::new(),
                phase1_objective,
                iterations: self.iterations,
            });
        }
        let mut x: Vec<f64> = (0..n).map(|j| self.current_value(j)).collect();
        for i in 0..self.rows {
            let j = self.basis[i];
            if j < n {
                x[j] = self.beta[i];
            }
        }
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(0.0, lp.upper[j]);
        }
        // Unit column of row i carries B⁻¹ (sign_i e_i) scaled by its own
        // coefficient (+1), so its reduced cost is −y_i·sign_i.
        let row_duals: Vec<f64> = (0..self.rows).map(|i| -self.d[self.unit_col[i]] * self.row_sign[i]).collect();
        let mut reduced_costs = lp.objective.clone();
        for (i, r) in lp.rows.iter().enumerate() {
            for &(j, v) in &r.coeffs {
                reduced_costs[j] -= row_duals[i] * v;
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(SimplexSolution {
            status: SimplexStatus::Optimal,
            objective,
            x,
            row_duals,
            reduced_costs,
            phase1_objective,
            iterations: self.iterations,
        })
    }
}
