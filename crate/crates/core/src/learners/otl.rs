use serde::{Deserialize, Serialize};

use super::{LearnerConfig, PhaseSchedule};
use crate::error::{Error, Result};
use crate::lp::{Block, DecisionVector, PcmcLp, FEAS_TOL};
use crate::oracle::{self, LpStatus};
use crate::reduction::{LpToLb, OnlineSolution, PhaseDiagnostics};

pub(crate) struct Segment {
    pub decisions: Vec<DecisionVector>,
    pub diag: PhaseDiagnostics,
}

fn scaled(v: &[f64], f: f64) -> Vec<f64> {
    v.iter().map(|x| x * f).collect()
}

pub(crate) fn shape_of(stream: &[Block], b: &[f64], d: &[f64]) -> Result<usize> {
    let first = stream.first().ok_or_else(|| Error::invalid("empty stream"))?;
    let k = first.k();
    for (t, blk) in stream.iter().enumerate() {
        if blk.k() != k || blk.a.len() != b.len() || blk.c.len() != d.len() {
            return Err(Error::invalid(format!("block {t} does not match the instance shape")));
        }
    }
    Ok(k)
}

/// One-time learning over the instance `blocks` (length `n'`, right-hand
/// sides `b`, `d`): learn from the first `h` blocks, decide the rest.
pub(crate) fn otl_segment(
    blocks: &[Block],
    h: usize,
    b: &[f64],
    d: &[f64],
    eps: f64,
    cfg: &LearnerConfig,
) -> Result<Segment> {
    let n = blocks.len();
    if h == 0 || h >= n {
        return Err(Error::invalid(format!("segment needs 0 < h < n, got h = {h}, n = {n}")));
    }
    let k = blocks[0].k();
    let eps_s = eps * 2f64.sqrt();
    let mut diag = PhaseDiagnostics {
        start: h,
        end: n,
        eps,
        ..Default::default()
    };
    let zeros = |n: usize| vec![DecisionVector::zeros(k); n];
    if 1.0 - eps_s <= 0.0 {
        diag.status = "degenerate: eps too large".into();
        return Ok(Segment { decisions: zeros(n - h), diag });
    }
    let frac = h as f64 / n as f64;
    let sample = PcmcLp::new(
        k,
        b.len(),
        d.len(),
        scaled(b, frac),
        scaled(d, (1.0 - eps_s) * frac),
        blocks[..h].to_vec(),
    )?;
    let res = oracle::solve(&sample)?;
    if res.status != LpStatus::Optimal {
        return Err(Error::EstimationFailure {
            reason: "sampled LP is infeasible".into(),
            phase1_objective: res.phase1_objective,
        });
    }
    let opt_hat = (1.0 - 2.0 * eps_s) / (1.0 + 3.0 * cfg.sigma) * res.value;
    diag.opt_estimate = Some(opt_hat);
    if !(opt_hat > 0.0) {
        diag.status = "degenerate: OPT estimate not positive".into();
        return Ok(Segment { decisions: zeros(n - h), diag });
    }
    let rest = (n - h) as f64 / n as f64;
    let b_rem = scaled(b, rest);
    let d_rem = scaled(d, (1.0 - eps_s) * rest);
    let mut rcfg = cfg.reduction(opt_hat, eps);
    rcfg.payoff = rcfg.payoff.resolve_sampled(&blocks[..h], opt_hat, &b_rem, &d_rem);
    let mut red = LpToLb::new(&rcfg, &b_rem, &d_rem, n - h)?;
    diag.payoff_bound = Some(red.payoff_bound());
    let mut decisions = Vec::with_capacity(n - h);
    for blk in &blocks[h..] {
        decisions.push(red.next(blk)?);
    }
    let run = red.finish();
    diag.halted_at = run.halted_at.map(|t| t + h);
    diag.status = if run.halted_at.is_some() { "halted".into() } else { "ran".into() };
    diag.value = blocks[h..].iter().zip(&decisions).map(|(blk, x)| blk.value(&x.x)).sum();
    Ok(Segment { decisions, diag })
}

/// One-time learning: zeros on the first `⌊n/2⌋` arrivals, which estimate
/// OPT; the reduction decides the second half.
pub fn run_otl(stream: &[Block], b: &[f64], d: &[f64], cfg: &LearnerConfig) -> Result<OnlineSolution> {
    cfg.validate()?;
    let k = shape_of(stream, b, d)?;
    let n = stream.len();
    if n < 2 {
        return Err(Error::invalid("one-time learning needs at least two arrivals"));
    }
    let h = n / 2;
    let mut seg = otl_segment(stream, h, b, d, cfg.eps, cfg)?;
    seg.diag.phase = 1;
    let mut decisions = vec![DecisionVector::zeros(k); h];
    decisions.extend(seg.decisions);
    let mut sol = OnlineSolution::evaluate(stream, decisions, b, d);
    sol.phases.push(seg.diag);
    Ok(sol)
}

pub(crate) fn recoverable(e: &Error) -> bool {
    matches!(e, Error::EstimationFailure { .. } | Error::Infeasible(_) | Error::Degenerate(_))
}

/// Dynamic learning: one-time learning over each doubling prefix `S_i`,
/// deciding `S_i ∖ S_{i−1}`; zeros on `S_0`. A phase whose estimate fails
/// emits zeros and the run continues.
pub fn run_dla(stream: &[Block], b: &[f64], d: &[f64], cfg: &LearnerConfig) -> Result<OnlineSolution> {
    cfg.validate()?;
    let k = shape_of(stream, b, d)?;
    let n = stream.len();
    let sched = PhaseSchedule::new(cfg.eps, n)?;
    let mut decisions = vec![DecisionVector::zeros(k); n];
    let mut phases = vec![PhaseDiagnostics {
        phase: 0,
        start: 0,
        end: sched.sizes[0],
        eps: sched.rates[0],
        status: "observe".into(),
        ..Default::default()
    }];
    for i in 1..=sched.phases() {
        let (lo, hi) = sched.segment(i);
        let frac = hi as f64 / n as f64;
        let eps_i = sched.rates[i];
        match otl_segment(&stream[..hi], lo, &scaled(b, frac), &scaled(d, frac), eps_i, cfg) {
            Ok(seg) => {
                decisions[lo..hi].clone_from_slice(&seg.decisions);
                phases.push(PhaseDiagnostics { phase: i, ..seg.diag });
            }
            Err(e) if recoverable(&e) => phases.push(PhaseDiagnostics {
                phase: i,
                start: lo,
                end: hi,
                eps: eps_i,
                status: format!("failed: {e}"),
                ..Default::default()
            }),
            Err(e) => return Err(e),
        }
    }
    let mut sol = OnlineSolution::evaluate(stream, decisions, b, d);
    sol.phases = phases;
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledLpCheck {
    pub eps_prime: f64,
    pub feasible: bool,
    /// `max_i usage_i / RHS_i` over packing rows of the restriction.
    pub packing_load: f64,
    /// `min_i usage_i / RHS_i` over covering rows with positive RHS.
    pub covering_ratio: f64,
}

/// Is `(1 − ε'/2)·x|_I` feasible for `L^I(1 − ε')`, with `ε' = ε·√(n/|I|)`?
pub fn sampled_restriction_feasible(lp: &PcmcLp, x: &[DecisionVector], subset: &[usize], eps: f64) -> Result<SampledLpCheck> {
    if x.len() != lp.n() {
        return Err(Error::invalid("solution length differs from n"));
    }
    let restricted = lp.restrict(subset)?;
    let eps_prime = eps * (lp.n() as f64 / subset.len() as f64).sqrt();
    let shrink = (1.0 - eps_prime / 2.0).max(0.0);
    let xs: Vec<DecisionVector> = subset
        .iter()
        .map(|&t| DecisionVector { x: x[t].x.iter().map(|v| v * shrink).collect() })
        .collect();
    let (pack, cover) = restricted.usage_of(&xs);
    let mut feasible = true;
    let mut packing_load: f64 = 0.0;
    for (u, r) in pack.iter().zip(restricted.b()) {
        feasible &= *u <= r + FEAS_TOL;
        if *r > 0.0 {
            packing_load = packing_load.max(u / r);
        } else if *u > 0.0 {
            packing_load = f64::INFINITY;
        }
    }
    let mut covering_ratio = f64::INFINITY;
    for (u, r) in cover.iter().zip(restricted.d()) {
        let need = (1.0 - eps_prime).max(0.0) * r;
        feasible &= *u >= need - FEAS_TOL;
        if *r > 0.0 {
            covering_ratio = covering_ratio.min(u / r);
        }
    }
    Ok(SampledLpCheck {
        eps_prime,
        feasible,
        packing_load,
        covering_ratio: if covering_ratio.is_finite() { covering_ratio } else { 1.0 },
    })
}
