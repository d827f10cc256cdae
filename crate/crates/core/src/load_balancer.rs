//! Generalized online load balancing: greedy best response against the
//! weights of an experts learner, restarted at half-time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::{Learner, LearnerKind};
use crate::oracle::{LinearProgram, Relation, SimplexStatus};

/// An `m × k` load matrix, stored by rows (machines).
pub type LoadMatrix = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadInstance {
    m: usize,
    k: usize,
    mats: Vec<LoadMatrix>,
}

impl LoadInstance {
    pub fn new(mats: Vec<LoadMatrix>) -> Result<Self> {
        let first = mats.first().ok_or_else(|| Error::invalid("load instance needs at least one matrix"))?;
        let m = first.len();
        let k = first.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(Error::invalid("load matrices need m, k ≥ 1"));
        }
        for (t, a) in mats.iter().enumerate() {
            if a.len() != m || a.iter().any(|r| r.len() != k) {
                return Err(Error::invalid(format!("matrix {t} is not {m}x{k}")));
            }
            if a.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("matrix {t} has a non-finite entry")));
            }
        }
        Ok(LoadInstance { m, k, mats })
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mats(&self) -> &[LoadMatrix] {
        &self.mats
    }

    pub fn permuted(&self, order: &[usize]) -> LoadInstance {
        LoadInstance {
            m: self.m,
            k: self.k,
            mats: order.iter().map(|&t| self.mats[t].clone()).collect(),
        }
    }

    /// Largest `|A^t_{ij}|`.
    pub fn max_abs_entry(&self) -> f64 {
        self.mats.iter().flatten().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Running sums `Σ o^t` and `Σ |o^t|` over one learner segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub start: usize,
    pub len: usize,
    pub signed: Vec<f64>,
    pub absolute: Vec<f64>,
    pub learner_reward: f64,
}

impl SegmentStats {
    fn new(start: usize, m: usize) -> Self {
        SegmentStats {
            start,
            len: 0,
            signed: vec![0.0; m],
            absolute: vec![0.0; m],
            learner_reward: 0.0,
        }
    }

    /// `max_i (Σ o_i − α Σ |o_i|)` over this segment.
    pub fn regret_adjusted(&self, alpha: f64) -> f64 {
        regret_adjusted(&self.signed, &self.absolute, alpha)
    }
}

fn regret_adjusted(signed: &[f64], absolute: &[f64], alpha: f64) -> f64 {
    signed
        .iter()
        .zip(absolute)
        .map(|(s, a)| s - alpha * a)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbRun {
    pub k: usize,
    /// Chosen column per step; the decision vector is its indicator.
    pub decisions: Vec<usize>,
    pub loads: Vec<f64>,
    pub makespan: f64,
    pub alpha: f64,
    pub regret_adjusted_makespan: f64,
    pub segments: Vec<SegmentStats>,
}

impl LbRun {
    pub fn decision_vector(&self, t: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.k];
        p[self.decisions[t]] = 1.0;
        p
    }
}

/// `argmin_j ⟨weights, mat_{·j}⟩`, ties toward the lowest index.
pub fn best_response(weights: &[f64], mat: &[Vec<f64>]) -> Result<usize> {
    if mat.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} weights for a matrix with {} rows",
            weights.len(),
            mat.len()
        )));
    }
    let k = mat.first().map_or(0, Vec::len);
    if k == 0 || mat.iter().any(|r| r.len() != k) {
        return Err(Error::invalid("ragged or empty load matrix"));
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for j in 0..k {
        let score: f64 = weights.iter().zip(mat).map(|(w, row)| w * row[j]).sum();
        if score < best_score {
            best = j;
            best_score = score;
        }
    }
    Ok(best)
}

/// Streaming form of the algorithm: feed matrices with [`ExpertLb::next`],
/// collect the run with [`ExpertLb::finish`].
pub struct ExpertLb {
    learner: Box<dyn Learner + Send>,
    n: usize,
    k: Option<usize>,
    alpha: f64,
    restart_after: usize,
    t: usize,
    decisions: Vec<usize>,
    loads: Vec<f64>,
    signed: Vec<f64>,
    absolute: Vec<f64>,
    segments: Vec<SegmentStats>,
}

impl ExpertLb {
    /// Multiplicative weights with learning rate `eps`.
    pub fn new(n: usize, m: usize, payoff_bound: f64, eps: f64) -> Result<Self> {
        Self::with_learner(n, LearnerKind::MultiplicativeWeights.build(m, eps, payoff_bound)?, eps)
    }

    /// Any learner; `alpha` is used for the regret-adjusted makespan.
    pub fn with_learner(n: usize, learner: Box<dyn Learner + Send>, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let m = learner.num_experts();
        Ok(ExpertLb {
            learner,
            n,
            k: None,
            alpha,
            restart_after: n.div_ceil(2),
            t: 0,
            decisions: Vec::with_capacity(n),
            loads: vec![0.0; m],
            signed: vec![0.0; m],
            absolute: vec![0.0; m],
            segments: vec![SegmentStats::new(0, m)],
        })
    }

    pub fn step(&self) -> usize {
        self.t
    }

    /// The learner's current weights, i.e. the dual used for the next step.
    pub fn weights(&self) -> &[f64] {
        self.learner.weights()
    }

    pub fn next(&mut self, mat: &[Vec<f64>]) -> Result<usize> {
        if self.t >= self.n {
            return Err(Error::invalid(format!("stream longer than the announced n = {}", self.n)));
        }
        let j = best_response(self.learner.weights(), mat)?;
        match self.k {
            None => self.k = Some(mat[0].len()),
            Some(k) if k != mat[0].len() => {
                return Err(Error::invalid(format!("matrix {} has {} columns, expected {k}", self.t, mat[0].len())))
            }
            _ => {}
        }
        let o: Vec<f64> = mat.iter().map(|row| row[j]).collect();
        let w_dot_o: f64 = self.learner.weights().iter().zip(&o).map(|(w, v)| w * v).sum();
        self.learner
            .observe(&o)
            .map_err(|e| Error::invalid(format!("step {}: {e}", self.t)))?;
        let seg = self.segments.last_mut().expect("at least one segment");
        for (i, &v) in o.iter().enumerate() {
            self.loads[i] += v;
            self.signed[i] += v;
            self.absolute[i] += v.abs();
            seg.signed[i] += v;
            seg.absolute[i] += v.abs();
        }
        seg.len += 1;
        seg.learner_reward += w_dot_o;
        self.decisions.push(j);
        self.t += 1;
        if self.t == self.restart_after && self.t < self.n {
            self.learner.restart();
            let m = self.loads.len();
            self.segments.push(SegmentStats::new(self.t, m));
        }
        Ok(j)
    }

    pub fn finish(self) -> LbRun {
        LbRun {
            k: self.k.unwrap_or(0),
            decisions: self.decisions,
            makespan: self.loads.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            loads: self.loads,
            alpha: self.alpha,
            regret_adjusted_makespan: regret_adjusted(&self.signed, &self.absolute, self.alpha),
            segments: self.segments,
        }
    }
}

/// Runs the algorithm over `stream` in the given order.
pub fn run_expert_lb(stream: &[LoadMatrix], payoff_bound: f64, eps: f64) -> Result<LbRun> {
    let m = stream.first().map_or(0, Vec::len);
    let mut lb = ExpertLb::new(stream.len(), m, payoff_bound, eps)?;
    for mat in stream {
        lb.next(mat)?;
    }
    Ok(lb.finish())
}

/// Offline optimum `λ* = min_p ‖Σ_t A^t p^t‖_max` over `p^t ∈ ∆^k`.
pub fn offline_makespan(instance: &LoadInstance) -> Result<f64> {
    let (n, m, k) = (instance.n(), instance.m(), instance.k());
    if n * k > crate::oracle::MAX_VARIABLES || m > crate::oracle::MAX_ROWS {
        return Err(Error::ResourceLimit(format!("makespan LP with n·k = {} and m = {m} is too large", n * k)));
    }
    // Variables: p (n·k), then λ = λ⁺ − λ⁻.
    let lp_pos = n * k;
    let mut prog = LinearProgram::new(n * k + 2);
    prog.objective[lp_pos] = -1.0;
    prog.objective[lp_pos + 1] = 1.0;
    for i in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (t, a) in instance.mats.iter().enumerate() {
            for j in 0..k {
                if a[i][j] != 0.0 {
                    coeffs.push((t * k + j, a[i][j]));
                }
            }
        }
        coeffs.push((lp_pos, -1.0));
        coeffs.push((lp_pos + 1, 1.0));
        prog.add_row(coeffs, Relation::Le, 0.0);
    }
    for t in 0..n {
        prog.add_row((0..k).map(|j| (t * k + j, 1.0)).collect(), Relation::Eq, 1.0);
    }
    let sol = prog.solve()?;
    match sol.status {
        SimplexStatus::Optimal => Ok(-sol.objective),
        other => Err(Error::Degenerate(format!("makespan LP returned {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineDiagnosis {
    pub machine: usize,
    pub min_entry: f64,
    pub max_entry: f64,
    pub within_range: bool,
    pub almost_nonnegative: bool,
    pub almost_nonpositive: bool,
}

impl MachineDiagnosis {
    pub fn ok(&self) -> bool {
        self.within_range && (self.almost_nonnegative || self.almost_nonpositive)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellBoundedReport {
    pub well_bounded: bool,
    pub machines: Vec<MachineDiagnosis>,
}

impl WellBoundedReport {
    pub fn flagged(&self) -> Vec<usize> {
        self.machines.iter().filter(|d| !d.ok()).map(|d| d.machine).collect()
    }
}

/// Entries in `[−M, M]`, and per machine either all entries `≥ −γλ*/n` or
/// all `≤ γλ*/n`. Comparisons carry a `1e−9` relative slack.
pub fn check_well_bounded(instance: &LoadInstance, payoff_bound: f64, gamma: f64, lambda_star: f64) -> WellBoundedReport {
    let n = instance.n() as f64;
    let side = gamma * lambda_star / n;
    let slack = 1e-9;
    let machines: Vec<MachineDiagnosis> = (0..instance.m())
        .map(|i| {
            let (lo, hi) = instance
                .mats
                .iter()
                .flat_map(|a| a[i].iter())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let bound = payoff_bound * (1.0 + slack);
            MachineDiagnosis {
                machine: i,
                min_entry: lo,
                max_entry: hi,
                within_range: lo >= -bound && hi <= bound,
                almost_nonnegative: lo >= -side - slack * (side.abs() + payoff_bound),
                almost_nonpositive: hi <= side + slack * (side.abs() + payoff_bound),
            }
        })
        .collect();
    WellBoundedReport {
        well_bounded: machines.iter().all(MachineDiagnosis::ok),
        machines,
    }
}
