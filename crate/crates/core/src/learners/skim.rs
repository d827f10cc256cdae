use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::otl::{recoverable, shape_of, Segment};
use super::{big_b, LearnerConfig, PhaseSchedule, SkimEstimates, MAX_LB_EPS};
use crate::error::{Error, Result};
use crate::lp::{Block, DecisionVector, GoodThresholdReport, PcmcLp};
use crate::oracle;
use crate::reduction::{LpToLb, OnlineSolution, PhaseDiagnostics};
use crate::rng;

/// Penalty constant in the skimmed-OPT estimate `Ô`.
const SKIM_PENALTY: f64 = 33.0;

/// `max(0, 1 − 6ε)`, the shrink applied to the reduction's output.
pub fn skim_scale(eps: f64) -> f64 {
    (1.0 - 6.0 * eps).max(0.0)
}

fn require_packing(stream: &[Block], d: &[f64]) -> Result<()> {
    if !d.is_empty() || stream.iter().any(|b| b.k() != 1) {
        return Err(Error::UnsupportedShape("skimming needs a packing-only program with k = 1".into()));
    }
    Ok(())
}

fn scaled(v: &[f64], f: f64) -> Vec<f64> {
    v.iter().map(|x| x * f).collect()
}

/// `τ̂ = (24/B)·OPT` of the quarter sample, whose right-hand side is
/// `(|quarter|/n)·b`.
pub fn estimate_tau(quarter: &[Block], n: usize, b: &[f64], big_b: f64) -> Result<f64> {
    require_packing(quarter, &[])?;
    if quarter.is_empty() || quarter.len() > n {
        return Err(Error::invalid("quarter sample must be nonempty and no longer than n"));
    }
    if !(big_b > 0.0) {
        return Err(Error::invalid("B must be positive"));
    }
    let lp = PcmcLp::new(1, b.len(), 0, scaled(b, quarter.len() as f64 / n as f64), Vec::new(), quarter.to_vec())?;
    Ok(24.0 * oracle::opt_value(&lp)? / big_b)
}

fn fits(used: &[f64], a: &[Vec<f64>], x: f64, cap: &[f64]) -> bool {
    used.iter().zip(a).zip(cap).all(|((u, row), c)| u + row[0] * x <= *c)
}

fn charge(used: &mut [f64], a: &[Vec<f64>], x: f64) {
    for (u, row) in used.iter_mut().zip(a) {
        *u += row[0] * x;
    }
}

/// Modified one-time learning over `blocks` (length `n'`, budget `b`):
/// threshold from the first quarter, skimmed estimates from the second,
/// then high-value items outright plus the truncated reduction output.
/// Every emitted decision also fits the segment budget `((n'−h)/n')·b`.
pub(crate) fn motl_segment(blocks: &[Block], h: usize, b: &[f64], eps: f64, cfg: &LearnerConfig) -> Result<(Segment, SkimEstimates)> {
    let n = blocks.len();
    if h == 0 || h >= n {
        return Err(Error::invalid(format!("segment needs 0 < h < n, got h = {h}, n = {n}")));
    }
    let q = h / 2;
    let mut diag = PhaseDiagnostics {
        start: h,
        end: n,
        eps,
        ..Default::default()
    };
    let mut est = SkimEstimates {
        big_b: big_b(b.len(), eps, cfg.delta.min(eps)),
        eps_prime: eps,
        ..Default::default()
    };
    if q == 0 {
        diag.status = "degenerate: empty quarter sample".into();
        let seg = Segment { decisions: vec![DecisionVector::zeros(1); n - h], diag };
        return Ok((seg, est));
    }
    est.tau_hat = estimate_tau(&blocks[..q], n, b, est.big_b)?;
    est.quarter_opt = est.tau_hat * est.big_b / 24.0;
    let tau = est.tau_hat;

    let mid = PcmcLp::new(1, b.len(), 0, scaled(b, (h - q) as f64 / n as f64), Vec::new(), blocks[q..h].to_vec())?;
    let skimmed = mid.skim(tau)?;
    let factor = 2.0 / (1.0 + 3.0 * eps);
    let mut reducer: Option<LpToLb> = None;
    if skimmed.negative_rhs_rows.is_empty() {
        let skim_opt = oracle::opt_value(&skimmed.lp)?;
        est.skim_opt = Some(skim_opt);
        est.o_hat = factor * (skim_opt - SKIM_PENALTY * eps * est.big_b * tau);
        est.b_hat = scaled(skimmed.lp.b(), factor);
        if est.o_hat > 0.0 && est.b_hat.iter().all(|v| *v > 0.0) {
            est.eps_prime = (eps * (2.0 * est.big_b * tau / est.o_hat).sqrt().max(1.0)).min(MAX_LB_EPS);
            let mut rcfg = cfg.reduction(est.o_hat, est.eps_prime);
            rcfg.payoff = rcfg.payoff.resolve_sampled(skimmed.lp.blocks(), est.o_hat, &est.b_hat, &[]);
            let red = LpToLb::new(&rcfg, &est.b_hat, &[], n - h)?;
            diag.payoff_bound = Some(red.payoff_bound());
            reducer = Some(red);
        }
        diag.opt_estimate = Some(est.o_hat);
    }
    diag.status = match (&reducer, skimmed.negative_rhs_rows.is_empty()) {
        (Some(_), _) => "ran".into(),
        (None, true) => "high-value only: skimmed estimate not positive".into(),
        (None, false) => "high-value only: skimmed sample over budget".into(),
    };

    let b_seg = scaled(b, (n - h) as f64 / n as f64);
    let shrink = skim_scale(eps);
    let mut used = vec![0.0; b.len()];
    let mut trunc_used = vec![0.0; b.len()];
    let mut truncated = false;
    let mut decisions = Vec::with_capacity(n - h);
    if reducer.is_some() {
        est.t_last = Some(n - 1);
    }
    for (off, blk) in blocks[h..].iter().enumerate() {
        let high = blk.pi[0] > tau;
        let mut want = 0.0;
        if let (Some(red), false) = (reducer.as_mut(), truncated) {
            let fed = if high {
                Block::new(vec![0.0], blk.a.clone(), Vec::new())
            } else {
                blk.clone()
            };
            let x = shrink * red.next(&fed)?.x[0];
            if fits(&trunc_used, &blk.a, x, &est.b_hat) {
                charge(&mut trunc_used, &blk.a, x);
                if !high {
                    want = x;
                }
            } else {
                truncated = true;
                est.t_last = Some(h + off - 1);
            }
        }
        if high {
            want = 1.0;
        }
        let mut x = 0.0;
        if want > 0.0 {
            if fits(&used, &blk.a, want, &b_seg) {
                charge(&mut used, &blk.a, want);
                x = want;
                if high {
                    est.high_value_taken += 1;
                }
            } else {
                est.budget_rejections += 1;
            }
        }
        decisions.push(DecisionVector { x: vec![x] });
    }
    if let Some(red) = reducer {
        let run = red.finish();
        diag.halted_at = run.halted_at.map(|t| t + h);
    }
    diag.value = blocks[h..].iter().zip(&decisions).map(|(blk, x)| blk.value(&x.x)).sum();
    Ok((Segment { decisions, diag }, est))
}

/// Modified one-time learning on a packing-only, single-choice stream.
pub fn run_motl(stream: &[Block], b: &[f64], cfg: &LearnerConfig) -> Result<(OnlineSolution, SkimEstimates)> {
    cfg.validate()?;
    shape_of(stream, b, &[])?;
    require_packing(stream, &[])?;
    let n = stream.len();
    if n < 4 {
        return Err(Error::invalid("modified one-time learning needs at least four arrivals"));
    }
    let h = n / 2;
    let (mut seg, est) = motl_segment(stream, h, b, cfg.eps, cfg)?;
    seg.diag.phase = 1;
    let mut decisions = vec![DecisionVector::zeros(1); h];
    decisions.extend(seg.decisions);
    let mut sol = OnlineSolution::evaluate(stream, decisions, b, &[]);
    sol.phases.push(seg.diag);
    Ok((sol, est))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdlaRun {
    pub solution: OnlineSolution,
    /// `solution` cut to zero after the longest prefix feasible for `b`.
    pub truncated: OnlineSolution,
    /// Length of that prefix.
    pub feasible_prefix: usize,
    pub estimates: Vec<Option<SkimEstimates>>,
}

/// Dynamic learning with the skimming one-time learner in every phase.
pub fn run_mdla(stream: &[Block], b: &[f64], cfg: &LearnerConfig) -> Result<MdlaRun> {
    cfg.validate()?;
    shape_of(stream, b, &[])?;
    require_packing(stream, &[])?;
    let n = stream.len();
    let sched = PhaseSchedule::new(cfg.eps, n)?;
    let mut decisions = vec![DecisionVector::zeros(1); n];
    let mut phases = vec![PhaseDiagnostics {
        phase: 0,
        start: 0,
        end: sched.sizes[0],
        eps: sched.rates[0],
        status: "observe".into(),
        ..Default::default()
    }];
    let mut estimates = vec![None];
    for i in 1..=sched.phases() {
        let (lo, hi) = sched.segment(i);
        let eps_i = sched.rates[i];
        match motl_segment(&stream[..hi], lo, &scaled(b, hi as f64 / n as f64), eps_i, cfg) {
            Ok((seg, est)) => {
                decisions[lo..hi].clone_from_slice(&seg.decisions);
                phases.push(PhaseDiagnostics { phase: i, ..seg.diag });
                estimates.push(Some(est));
            }
            Err(e) if recoverable(&e) => {
                phases.push(PhaseDiagnostics {
                    phase: i,
                    start: lo,
                    end: hi,
                    eps: eps_i,
                    status: format!("failed: {e}"),
                    ..Default::default()
                });
                estimates.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let mut used = vec![0.0; b.len()];
    let mut feasible_prefix = n;
    for (t, (blk, x)) in stream.iter().zip(&decisions).enumerate() {
        if !fits(&used, &blk.a, x.x[0], b) {
            feasible_prefix = t;
            break;
        }
        charge(&mut used, &blk.a, x.x[0]);
    }
    let mut cut = decisions.clone();
    cut[feasible_prefix..].iter_mut().for_each(|x| x.x[0] = 0.0);
    let mut solution = OnlineSolution::evaluate(stream, decisions, b, &[]);
    solution.phases = phases;
    let mut truncated = OnlineSolution::evaluate(stream, cut, b, &[]);
    truncated.phases = solution.phases.clone();
    Ok(MdlaRun {
        solution,
        truncated,
        feasible_prefix,
        estimates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropTopReport {
    pub big_b: f64,
    /// `K = ⌈128·ε·B⌉`, capped at n.
    pub k_drop: usize,
    pub width: f64,
    pub width_ok: bool,
    pub eps_ok: bool,
    pub k_ok: bool,
    pub opt_without_top: f64,
    /// Fraction of permutations with `OPT(L̄^{≤n/4}) ≥ OPT(L_{<K})/8`.
    pub quarter_frequency: f64,
    pub trials: usize,
    pub thresholds: Vec<(f64, GoodThresholdReport)>,
    pub notes: Vec<String>,
}

impl DropTopReport {
    pub fn preconditions_hold(&self) -> bool {
        self.width_ok && self.eps_ok && self.k_ok
    }

    pub fn thresholds_good(&self) -> bool {
        self.thresholds.iter().all(|(_, r)| r.is_good())
    }
}

/// Empirical check of the top-K removal lemmas: the quarter-sample OPT
/// versus `OPT(L_{<K})/8`, and S1–S3 for thresholds `τ ≥ 3·OPT(L_{<K})/B`
/// with `Δ = τB/24`. Precondition breaches are reported, not raised.
pub fn drop_top_check(lp: &PcmcLp, eps: f64, delta: f64, trials: usize, seed: u64) -> Result<DropTopReport> {
    if !lp.is_packing_only() || lp.k() != 1 {
        return Err(Error::UnsupportedShape("drop_top_check needs a packing-only program with k = 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("eps and delta must lie in (0,1)"));
    }
    let n = lp.n();
    let bb = big_b(lp.m(), eps, delta);
    let mut notes = Vec::new();
    let raw_k = (128.0 * eps * bb).ceil() as usize;
    let k_drop = raw_k.min(n);
    if raw_k > n {
        notes.push(format!("K = {raw_k} exceeds n = {n}; capped"));
    }
    let width = lp.width_report(None)?.width;
    let width_ok = width >= 16.0 * bb;
    let eps_ok = eps <= 1.0 / 32.0 + 1e-15;
    let k_ok = (k_drop as f64) <= eps / 2.0 * width;
    if !width_ok {
        notes.push(format!("width {width:.3} below 16B = {:.3}", 16.0 * bb));
    }
    if !eps_ok {
        notes.push("eps above 1/32".into());
    }
    if !k_ok {
        notes.push("K above (eps/2)·width".into());
    }
    let opt_without_top = oracle::opt_value(&lp.drop_top_k(k_drop)?)?;

    let q = n / 4;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            if q == 0 {
                return Ok(opt_without_top <= 0.0);
            }
            let mut g = rng::seeded(rng::derive_seed(seed, r as u64));
            let idx = rng::sample_indices(&mut g, n, q);
            let v = oracle::opt_value(&lp.restrict(&idx)?)?;
            Ok(v >= opt_without_top / 8.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let quarter_frequency = if trials == 0 {
        f64::NAN
    } else {
        hits.iter().filter(|h| **h).count() as f64 / trials as f64
    };

    let tau0 = 3.0 * opt_without_top / bb;
    let top = lp.blocks().iter().map(|b| b.pi[0]).fold(0.0, f64::max);
    let mut taus = vec![tau0, 2.0 * tau0, top + 1.0];
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let thresholds = taus
        .into_iter()
        .map(|tau| Ok((tau, lp.check_good_threshold(tau, tau * bb / 24.0, eps, bb)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DropTopReport {
        big_b: bb,
        k_drop,
        width,
        width_ok,
        eps_ok,
        k_ok,
        opt_without_top,
        quarter_frequency,
        trials,
        thresholds,
        notes,
    })
}
