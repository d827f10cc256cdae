//! From packing/covering LPs to load balancing.
//!
//! Each arriving block becomes a signed `(m+1) × (k+1)` load matrix `H^t`:
//! row 0 turns the objective into a covering row against the estimate ŌPT,
//! packing rows are normalized by `b`, covering rows are flipped and shifted
//! by `2/n`, and the extra column means "take nothing". The load balancer's
//! decision, minus that column and scaled down, is the LP decision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::LearnerKind;
use crate::load_balancer::{check_well_bounded, offline_makespan, ExpertLb, LbRun, LoadInstance, LoadMatrix, WellBoundedReport};
use crate::lp::{Block, DecisionVector, PcmcLp, FEAS_TOL};
use crate::oracle;

/// How the load balancer's payoff bound `M` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffBound {
    /// `2ε²/ln((m+1)/δ)`: valid when the generalized width is at least
    /// `ln((m+1)/δ)/ε²`.
    #[default]
    Theory,
    /// `2/W` for a known (generalized) width `W`.
    Width(f64),
    Explicit(f64),
    /// Twice the largest `|H|` entry over an observed sample; resolved by
    /// [`PayoffBound::resolve_sampled`] before use.
    Sampled,
}

impl PayoffBound {
    /// Replaces [`PayoffBound::Sampled`] by an explicit bound computed from
    /// `sample` against the right-hand sides the load balancer will see.
    pub fn resolve_sampled(self, sample: &[Block], opt_estimate: f64, b: &[f64], d: &[f64]) -> PayoffBound {
        if self != PayoffBound::Sampled {
            return self;
        }
        let mut top: f64 = 0.0;
        for blk in sample {
            for &p in &blk.pi {
                top = top.max(p / opt_estimate);
            }
            for (row, &bi) in blk.a.iter().zip(b) {
                for &v in row {
                    top = top.max(v / bi);
                }
            }
            for (row, &di) in blk.c.iter().zip(d) {
                for &v in row {
                    top = top.max(v / di);
                }
            }
        }
        PayoffBound::Explicit(2.0 * top)
    }
}

/// What the streaming reduction does when a load exceeds the payoff bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreachPolicy {
    #[default]
    Error,
    /// Stop deciding: emit zeros for the rest of the stream.
    Halt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpToLbConfig {
    pub opt_estimate: f64,
    pub eps: f64,
    pub delta: f64,
    pub c1: f64,
    pub eps0: f64,
    pub payoff: PayoffBound,
    pub learner: LearnerKind,
    pub on_breach: BreachPolicy,
}

pub const DEFAULT_C1: f64 = 168.0;
pub const DEFAULT_EPS0: f64 = 0.01;

impl LpToLbConfig {
    pub fn new(opt_estimate: f64, eps: f64, delta: f64) -> Self {
        LpToLbConfig {
            opt_estimate,
            eps,
            delta,
            c1: DEFAULT_C1,
            eps0: DEFAULT_EPS0,
            payoff: PayoffBound::Theory,
            learner: LearnerKind::MultiplicativeWeights,
            on_breach: BreachPolicy::Error,
        }
    }

    pub fn with_c1(mut self, c1: f64) -> Self {
        self.c1 = c1;
        self
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = eps0;
        self
    }

    pub fn with_payoff(mut self, payoff: PayoffBound) -> Self {
        self.payoff = payoff;
        self
    }

    pub fn with_breach_policy(mut self, policy: BreachPolicy) -> Self {
        self.on_breach = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.opt_estimate > 0.0 && self.opt_estimate.is_finite()) {
            return Err(Error::invalid(format!("OPT estimate must be positive, got {}", self.opt_estimate)));
        }
        if !(self.eps > 0.0 && self.eps <= self.eps0) {
            return Err(Error::invalid(format!("eps = {} outside (0, eps0 = {}]", self.eps, self.eps0)));
        }
        if self.lb_rate() > 1.0 {
            return Err(Error::invalid(format!("learning rate √8·eps = {} exceeds 1", self.lb_rate())));
        }
        if !(self.delta > 0.0 && self.delta <= self.eps) {
            return Err(Error::invalid(format!("delta = {} outside (0, eps]", self.delta)));
        }
        if !(self.c1 > 0.0) {
            return Err(Error::invalid("c1 must be positive"));
        }
        match self.payoff {
            PayoffBound::Width(w) if !(w > 0.0) => Err(Error::invalid("width hint must be positive")),
            PayoffBound::Explicit(m) if !(m > 0.0 && m.is_finite()) => Err(Error::invalid("payoff bound must be positive")),
            PayoffBound::Sampled => Err(Error::invalid("sampled payoff bound was not resolved against a sample")),
            _ => Ok(()),
        }
    }

    /// `2ε²/ln(rows/δ)` where `rows = m_p + m_c + 1`.
    pub fn theory_payoff_bound(&self, rows: usize) -> f64 {
        2.0 * self.eps * self.eps / (rows as f64 / self.delta).ln()
    }

    /// Payoff bound handed to the load balancer, never below the `2/n` of
    /// the do-nothing column.
    pub fn payoff_bound(&self, rows: usize, n: usize) -> f64 {
        let m = match self.payoff {
            PayoffBound::Theory | PayoffBound::Sampled => self.theory_payoff_bound(rows),
            PayoffBound::Width(w) => 2.0 / w,
            PayoffBound::Explicit(m) => m,
        };
        m.max(2.0 / n as f64)
    }

    /// Learning rate `√8·ε` of the load balancer.
    pub fn lb_rate(&self) -> f64 {
        8f64.sqrt() * self.eps
    }

    /// `(1 − ε')/(1 + 4c₁ε')`.
    pub fn output_scale(&self) -> f64 {
        let e = self.lb_rate();
        (1.0 - e) / (1.0 + 4.0 * self.c1 * e)
    }

    /// Smallest generalized width for which the guarantee is expected.
    pub fn required_width(&self, rows: usize) -> f64 {
        (rows as f64 / self.delta).ln() / (self.eps * self.eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HMatrix {
    pub rows: LoadMatrix,
}

/// Builds `H^t` for one block.
pub fn build_h(block: &Block, opt_estimate: f64, b: &[f64], d: &[f64], n: usize) -> Result<HMatrix> {
    if !(opt_estimate > 0.0) {
        return Err(Error::invalid("OPT estimate must be positive"));
    }
    if let Some(i) = b.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::invalid(format!("packing right-hand side {i} is not positive")));
    }
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::invalid(format!("covering right-hand side {i} is not positive")));
    }
    if block.a.len() != b.len() || block.c.len() != d.len() {
        return Err(Error::invalid("block rows do not match the right-hand sides"));
    }
    let k = block.k();
    let two_n = 2.0 / n as f64;
    let mut rows = Vec::with_capacity(1 + b.len() + d.len());
    let mut r0: Vec<f64> = block.pi.iter().map(|p| two_n - p / opt_estimate).collect();
    r0.push(two_n);
    rows.push(r0);
    for (a, &bi) in block.a.iter().zip(b) {
        let mut r: Vec<f64> = a.iter().map(|v| v / bi).collect();
        r.push(0.0);
        rows.push(r);
    }
    for (c, &di) in block.c.iter().zip(d) {
        let mut r: Vec<f64> = c.iter().map(|v| two_n - v / di).collect();
        r.push(two_n);
        rows.push(r);
    }
    debug_assert!(rows.iter().all(|r| r.len() == k + 1));
    Ok(HMatrix { rows })
}

/// The whole offline H-instance of `lp`.
pub fn h_instance(lp: &PcmcLp, opt_estimate: f64) -> Result<LoadInstance> {
    let mats = lp
        .blocks()
        .iter()
        .map(|blk| build_h(blk, opt_estimate, lp.b(), lp.d(), lp.n()).map(|h| h.rows))
        .collect::<Result<Vec<_>>>()?;
    LoadInstance::new(mats)
}

/// Per-phase bookkeeping of a learner run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagnostics {
    pub phase: usize,
    pub start: usize,
    pub end: usize,
    pub eps: f64,
    pub opt_estimate: Option<f64>,
    pub payoff_bound: Option<f64>,
    pub value: f64,
    pub halted_at: Option<usize>,
    pub status: String,
}

impl PhaseDiagnostics {
    pub fn compact(&self) -> String {
        let mut s = format!("{}[{},{}):{}", self.phase, self.start, self.end, self.status);
        if let Some(t) = self.halted_at {
            s.push_str(&format!("@{t}"));
        }
        s
    }
}

/// An online solution with its feasibility and value accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineSolution {
    pub decisions: Vec<DecisionVector>,
    pub value: f64,
    pub packing_usage: Vec<f64>,
    pub covering_usage: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub phases: Vec<PhaseDiagnostics>,
}

impl OnlineSolution {
    /// Accounts `decisions` against `blocks` (both in arrival order).
    pub fn evaluate(blocks: &[Block], decisions: Vec<DecisionVector>, b: &[f64], d: &[f64]) -> Self {
        let mut packing_usage = vec![0.0; b.len()];
        let mut covering_usage = vec![0.0; d.len()];
        let mut value = 0.0;
        for (blk, x) in blocks.iter().zip(&decisions) {
            value += blk.value(&x.x);
            blk.add_packing_usage(&x.x, &mut packing_usage);
            blk.add_covering_usage(&x.x, &mut covering_usage);
        }
        OnlineSolution {
            decisions,
            value,
            packing_usage,
            covering_usage,
            b: b.to_vec(),
            d: d.to_vec(),
            phases: Vec::new(),
        }
    }

    pub fn packing_slack(&self) -> Vec<f64> {
        self.b.iter().zip(&self.packing_usage).map(|(b, u)| b - u).collect()
    }

    /// Largest `usage − b`, clipped at 0.
    pub fn max_pack_violation(&self) -> f64 {
        self.packing_slack().iter().fold(0.0, |a, s| a.max(-s))
    }

    pub fn packing_feasible(&self) -> bool {
        self.packing_slack().iter().all(|s| *s >= -FEAS_TOL)
    }

    /// `min_i usage_i/d_i` over rows with `d_i > 0`; 1 when there are none.
    pub fn min_cover_ratio(&self) -> f64 {
        let r = self
            .covering_usage
            .iter()
            .zip(&self.d)
            .filter(|(_, d)| **d > 0.0)
            .map(|(u, d)| u / d)
            .fold(f64::INFINITY, f64::min);
        if r.is_finite() {
            r
        } else {
            1.0
        }
    }

    /// Shortfall `1 − min_cover_ratio`, clipped at 0.
    pub fn covering_shortfall(&self) -> f64 {
        (1.0 - self.min_cover_ratio()).max(0.0)
    }

    pub fn value_ratio(&self, reference: f64) -> f64 {
        if reference > 0.0 {
            self.value / reference
        } else {
            f64::NAN
        }
    }

    /// Packing feasible and covering within `(1−eps)`.
    pub fn is_eps_feasible(&self, eps: f64) -> bool {
        self.packing_feasible()
            && self
                .covering_usage
                .iter()
                .zip(&self.d)
                .all(|(u, d)| *u >= (1.0 - eps) * d - FEAS_TOL)
    }
}

/// Outcome of one streaming reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpToLbRun {
    pub decisions: Vec<DecisionVector>,
    pub lb: LbRun,
    pub payoff_bound: f64,
    pub scale: f64,
    pub halted_at: Option<usize>,
}

/// Streaming reduction: [`LpToLb::next`] per block, then [`LpToLb::finish`].
pub struct LpToLb {
    lb: ExpertLb,
    opt_estimate: f64,
    b: Vec<f64>,
    d: Vec<f64>,
    n: usize,
    scale: f64,
    payoff_bound: f64,
    policy: BreachPolicy,
    decisions: Vec<DecisionVector>,
    halted_at: Option<usize>,
}

impl LpToLb {
    pub fn new(cfg: &LpToLbConfig, b: &[f64], d: &[f64], n: usize) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let rows = 1 + b.len() + d.len();
        let payoff_bound = cfg.payoff_bound(rows, n);
        let eta = cfg.lb_rate();
        let learner = cfg.learner.build(rows, eta, payoff_bound)?;
        Ok(LpToLb {
            lb: ExpertLb::with_learner(n, learner, eta)?,
            opt_estimate: cfg.opt_estimate,
            b: b.to_vec(),
            d: d.to_vec(),
            n,
            scale: cfg.output_scale(),
            payoff_bound,
            policy: cfg.on_breach,
            decisions: Vec::with_capacity(n),
            halted_at: None,
        })
    }

    pub fn payoff_bound(&self) -> f64 {
        self.payoff_bound
    }

    pub fn next(&mut self, block: &Block) -> Result<DecisionVector> {
        let k = block.k();
        if self.halted_at.is_some() {
            let x = DecisionVector::zeros(k);
            self.decisions.push(x.clone());
            return Ok(x);
        }
        let h = build_h(block, self.opt_estimate, &self.b, &self.d, self.n)?;
        let j = match self.lb.next(&h.rows) {
            Ok(j) => j,
            Err(e) => match self.policy {
                BreachPolicy::Error => return Err(e),
                BreachPolicy::Halt => {
                    self.halted_at = Some(self.decisions.len());
                    let x = DecisionVector::zeros(k);
                    self.decisions.push(x.clone());
                    return Ok(x);
                }
            },
        };
        let mut x = DecisionVector::zeros(k);
        if j < k {
            x.x[j] = self.scale;
        }
        self.decisions.push(x.clone());
        Ok(x)
    }

    pub fn finish(self) -> LpToLbRun {
        LpToLbRun {
            decisions: self.decisions,
            lb: self.lb.finish(),
            payoff_bound: self.payoff_bound,
            scale: self.scale,
            halted_at: self.halted_at,
        }
    }
}

/// Runs the reduction over `stream` (arrival order) with right-hand sides
/// `b`, `d` and `n = stream.len()`.
pub fn run_lp_to_lb(stream: &[Block], cfg: &LpToLbConfig, b: &[f64], d: &[f64]) -> Result<(OnlineSolution, LpToLbRun)> {
    let mut red = LpToLb::new(cfg, b, d, stream.len())?;
    for blk in stream {
        red.next(blk)?;
    }
    let run = red.finish();
    let mut sol = OnlineSolution::evaluate(stream, run.decisions.clone(), b, d);
    sol.phases.push(PhaseDiagnostics {
        phase: 0,
        start: 0,
        end: stream.len(),
        eps: cfg.eps,
        opt_estimate: Some(cfg.opt_estimate),
        payoff_bound: Some(run.payoff_bound),
        value: sol.value,
        halted_at: run.halted_at,
        status: if run.halted_at.is_some() { "halted".into() } else { "ran".into() },
    });
    Ok((sol, run))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionAudit {
    pub opt: f64,
    pub opt_estimate: f64,
    pub lambda_star: f64,
    pub payoff_bound: f64,
    pub well_bounded: WellBoundedReport,
    pub generalized_width: f64,
    pub required_width: f64,
    pub guarantee_expected: bool,
    pub diagnostic: Option<String>,
}

/// Builds the offline H-instance of `lp` under `cfg` and reports its
/// optimal makespan, `(M, 4)`-well-boundedness and the width margin.
pub fn audit_reduction(lp: &PcmcLp, cfg: &LpToLbConfig) -> Result<ReductionAudit> {
    let opt = oracle::opt_value(lp)?;
    if !(cfg.opt_estimate > 0.0) {
        return Err(Error::invalid("OPT estimate must be positive"));
    }
    let inst = h_instance(lp, cfg.opt_estimate)?;
    let lambda_star = offline_makespan(&inst)?;
    let rows = 1 + lp.m();
    let payoff_bound = cfg.payoff_bound(rows, lp.n());
    let well_bounded = check_well_bounded(&inst, payoff_bound, 4.0, lambda_star);
    let generalized_width = if opt > 0.0 {
        lp.width_report(Some(opt))?.generalized_width
    } else {
        lp.width_report(None)?.width
    };
    let required_width = cfg.required_width(rows);
    let guarantee_expected = generalized_width >= required_width;
    let diagnostic = (!guarantee_expected).then(|| {
        format!("guarantee not expected: generalized width {generalized_width:.4} below {required_width:.4}")
    });
    Ok(ReductionAudit {
        opt,
        opt_estimate: cfg.opt_estimate,
        lambda_star,
        payoff_bound,
        well_bounded,
        generalized_width,
        required_width,
        guarantee_expected,
        diagnostic,
    })
}
