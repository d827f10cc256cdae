use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{self, LearnerConfig, MAX_LB_EPS};
use crate::load_balancer::{self, LoadInstance};
use crate::lp::{Block, PcmcLp, FEAS_TOL};
use crate::oracle;
use crate::reduction::{self, BreachPolicy, LpToLbConfig, OnlineSolution, PayoffBound};
use crate::rng;

use super::generate::permutation;

/// Environment variable capping the worker threads of [`experiment`].
pub const THREADS_ENV: &str = "RO_LP_THREADS";

/// Makespan factor `1 + SLACK·ε` counted as success for the load balancer.
pub const MAKESPAN_SLACK: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Otl,
    Dla,
    Motl,
    Mdla,
    /// The reduction alone, fed the oracle optimum (times `opt_scale`).
    Lptolb,
    /// The load balancer on the packing matrices.
    Expertlb,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Otl => "otl",
            Algorithm::Dla => "dla",
            Algorithm::Motl => "motl",
            Algorithm::Mdla => "mdla",
            Algorithm::Lptolb => "lptolb",
            Algorithm::Expertlb => "expertlb",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: Algorithm,
    pub eps: f64,
    pub delta: f64,
    #[serde(default = "unit")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "single")]
    pub permutations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<PayoffBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_scale: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

fn single() -> usize {
    1
}

impl RunConfig {
    pub fn new(algo: Algorithm, eps: f64, delta: f64) -> Self {
        RunConfig {
            algo,
            eps,
            delta,
            sigma: 1.0,
            seed: 0,
            permutations: 1,
            c1: None,
            payoff: None,
            opt_scale: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_permutations(mut self, r: usize) -> Self {
        self.permutations = r;
        self
    }

    pub fn with_c1(mut self, c1: f64) -> Self {
        self.c1 = Some(c1);
        self
    }

    pub fn with_payoff(mut self, payoff: PayoffBound) -> Self {
        self.payoff = Some(payoff);
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.permutations == 0 {
            return Err(Error::invalid("permutations must be positive"));
        }
        if let Some(s) = self.opt_scale {
            if !(s > 0.0) {
                return Err(Error::invalid("opt_scale must be positive"));
            }
        }
        match self.algo {
            Algorithm::Expertlb => {
                if !(self.eps > 0.0 && self.eps <= 0.5) {
                    return Err(Error::invalid(format!("eps must lie in (0, 1/2], got {}", self.eps)));
                }
                Ok(())
            }
            Algorithm::Lptolb => self.lp_to_lb(1.0).validate(),
            _ => self.learner().validate(),
        }
    }

    fn learner(&self) -> LearnerConfig {
        let mut cfg = LearnerConfig::new(self.eps, self.delta).with_sigma(self.sigma);
        if let Some(c1) = self.c1 {
            cfg = cfg.with_c1(c1);
        }
        if let Some(p) = self.payoff {
            cfg = cfg.with_payoff(p);
        }
        cfg
    }

    fn lp_to_lb(&self, opt: f64) -> LpToLbConfig {
        let mut cfg = LpToLbConfig::new(opt * self.opt_scale.unwrap_or(1.0), self.eps, self.delta)
            .with_eps0(MAX_LB_EPS.max(self.eps))
            .with_payoff(self.payoff.unwrap_or_default())
            .with_breach_policy(BreachPolicy::Halt);
        if let Some(c1) = self.c1 {
            cfg = cfg.with_c1(c1);
        }
        cfg
    }
}

/// One permutation's outcome. Failed runs keep zeros and an `error:` status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub permutation: usize,
    pub seed: u64,
    pub algo: String,
    pub status: String,
    /// Objective value, or makespan for the load balancer.
    pub value: f64,
    /// Offline optimum, or offline makespan for the load balancer.
    pub opt: f64,
    pub value_ratio: f64,
    pub max_pack_violation: f64,
    pub min_cover_ratio: f64,
    pub packing_feasible: bool,
    /// The run's guarantee event: ε-feasibility for LP algorithms,
    /// makespan within `(1 + 20ε)·λ*` for the load balancer.
    pub event_ok: bool,
    pub phases: String,
}

impl RunRow {
    pub fn succeeded(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub runs: usize,
    pub errors: usize,
    pub eps: f64,
    pub delta: f64,
    pub min_value_ratio: Option<f64>,
    pub mean_value_ratio: Option<f64>,
    /// `1 − min value ratio` (for LP algorithms).
    pub kappa: Option<f64>,
    /// `kappa / ε`, the empirical constant in front of ε.
    pub c_value: Option<f64>,
    /// Fraction of successful runs with a packing violation.
    pub violation_frequency: f64,
    /// Fraction of all runs whose guarantee event failed; compare to δ.
    pub event_failure_frequency: f64,
}

impl Aggregates {
    pub fn from_rows(rows: &[RunRow], cfg: &RunConfig) -> Self {
        let ok: Vec<&RunRow> = rows.iter().filter(|r| r.succeeded()).collect();
        let ratios: Vec<f64> = ok.iter().map(|r| r.value_ratio).collect();
        let min = ratios.iter().cloned().reduce(f64::min);
        let mean = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        let lp_algo = cfg.algo != Algorithm::Expertlb;
        let kappa = min.filter(|_| lp_algo).map(|m| 1.0 - m);
        let frac = |count: usize, of: usize| if of == 0 { 0.0 } else { count as f64 / of as f64 };
        Aggregates {
            runs: rows.len(),
            errors: rows.len() - ok.len(),
            eps: cfg.eps,
            delta: cfg.delta,
            min_value_ratio: min,
            mean_value_ratio: mean,
            kappa,
            c_value: kappa.map(|k| k / cfg.eps),
            violation_frequency: frac(ok.iter().filter(|r| !r.packing_feasible).count(), ok.len()),
            event_failure_frequency: frac(rows.iter().filter(|r| !r.event_ok).count(), rows.len()),
        }
    }

    fn close_to(&self, other: &Aggregates) -> bool {
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        let opt_near = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => near(x, y),
            (None, None) => true,
            _ => false,
        };
        self.runs == other.runs
            && self.errors == other.errors
            && near(self.eps, other.eps)
            && near(self.delta, other.delta)
            && opt_near(self.min_value_ratio, other.min_value_ratio)
            && opt_near(self.mean_value_ratio, other.mean_value_ratio)
            && opt_near(self.kappa, other.kappa)
            && opt_near(self.c_value, other.c_value)
            && near(self.violation_frequency, other.violation_frequency)
            && near(self.event_failure_frequency, other.event_failure_frequency)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub k: usize,
    pub m_p: usize,
    pub m_c: usize,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub config: RunConfig,
    pub opt: f64,
    pub rows: Vec<RunRow>,
    pub aggregates: Aggregates,
}

impl RunReport {
    pub fn recomputed(&self) -> Aggregates {
        Aggregates::from_rows(&self.rows, &self.config)
    }

    /// Parses a report and rejects it when its aggregates disagree with its rows.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(s)?;
        if !report.aggregates.close_to(&report.recomputed()) {
            return Err(Error::invalid("report aggregates do not match its rows"));
        }
        Ok(report)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
    }
}

/// A thread pool sized by `RO_LP_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|t| *t > 0)
            .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| Error::ResourceLimit(e.to_string()))
}

fn load_instance(lp: &PcmcLp) -> Result<LoadInstance> {
    LoadInstance::new(lp.blocks().iter().map(|blk| blk.a.clone()).collect())
}

/// Offline reference for `cfg.algo` on `lp`: the LP optimum, or the optimal
/// fractional makespan for the load balancer.
pub fn reference_value(lp: &PcmcLp, algo: Algorithm) -> Result<f64> {
    match algo {
        Algorithm::Expertlb => load_balancer::offline_makespan(&load_instance(lp)?),
        _ => oracle::opt_value(lp),
    }
}

fn lp_row(sol: &OnlineSolution, eps: f64) -> (f64, f64, f64, bool, bool, String) {
    let phases: Vec<String> = sol.phases.iter().map(|p| p.compact()).collect();
    (
        sol.value,
        sol.max_pack_violation(),
        sol.min_cover_ratio(),
        sol.packing_feasible(),
        sol.is_eps_feasible(eps),
        phases.join(";"),
    )
}

fn run_once(lp: &PcmcLp, cfg: &RunConfig, opt: f64, stream: &[Block]) -> Result<(f64, f64, f64, bool, bool, String)> {
    let (b, d) = (lp.b(), lp.d());
    let sol = match cfg.algo {
        Algorithm::Otl => learners::run_otl(stream, b, d, &cfg.learner())?,
        Algorithm::Dla => learners::run_dla(stream, b, d, &cfg.learner())?,
        Algorithm::Motl => learners::run_motl(stream, b, &cfg.learner())?.0,
        Algorithm::Mdla => learners::run_mdla(stream, b, &cfg.learner())?.solution,
        Algorithm::Lptolb => reduction::run_lp_to_lb(stream, &cfg.lp_to_lb(opt), b, d)?.0,
        Algorithm::Expertlb => {
            let mats: Vec<_> = stream.iter().map(|blk| blk.a.clone()).collect();
            let bound = match cfg.payoff {
                Some(PayoffBound::Explicit(m)) => m,
                None => load_instance(lp)?.max_abs_entry(),
                Some(other) => return Err(Error::invalid(format!("load balancer needs an explicit payoff bound, got {other:?}"))),
            };
            let run = load_balancer::run_expert_lb(&mats, bound, cfg.eps)?;
            let ok = run.makespan <= (1.0 + MAKESPAN_SLACK * cfg.eps) * opt + FEAS_TOL;
            return Ok((run.makespan, 0.0, 1.0, true, ok, String::new()));
        }
    };
    Ok(lp_row(&sol, cfg.eps))
}

/// Runs `cfg.permutations` seeded random orders of `lp` in parallel. The
/// offline reference is solved once; a failing run becomes an error row.
pub fn experiment(lp: &PcmcLp, cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let opt = reference_value(lp, cfg.algo)?;
    let pool = thread_pool()?;
    let rows: Vec<RunRow> = pool.install(|| {
        (0..cfg.permutations)
            .into_par_iter()
            .map(|r| {
                let seed = rng::derive_seed(cfg.seed, r as u64);
                let stream: Vec<Block> = permutation(lp.n(), seed).into_iter().map(|t| lp.block(t).clone()).collect();
                let mut row = RunRow {
                    permutation: r,
                    seed,
                    algo: cfg.algo.name().into(),
                    status: "ok".into(),
                    value: 0.0,
                    opt,
                    value_ratio: 0.0,
                    max_pack_violation: 0.0,
                    min_cover_ratio: 0.0,
                    packing_feasible: false,
                    event_ok: false,
                    phases: String::new(),
                };
                match run_once(lp, cfg, opt, &stream) {
                    Ok((value, viol, cover, feasible, event, phases)) => {
                        row.value = value;
                        row.value_ratio = if opt > 0.0 { value / opt } else { 1.0 };
                        row.max_pack_violation = viol;
                        row.min_cover_ratio = cover;
                        row.packing_feasible = feasible;
                        row.event_ok = event;
                        row.phases = phases;
                    }
                    Err(e) => row.status = format!("error: {e}"),
                }
                row
            })
            .collect()
    });
    let aggregates = Aggregates::from_rows(&rows, cfg);
    Ok(RunReport {
        instance: InstanceSummary {
            n: lp.n(),
            k: lp.k(),
            m_p: lp.m_p(),
            m_c: lp.m_c(),
            width: lp.width_report(None)?.width,
        },
        config: cfg.clone(),
        opt,
        rows,
        aggregates,
    })
}
