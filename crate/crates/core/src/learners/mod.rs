//! OPT-estimating online algorithms built on the reduction:
//! one-time learning, dynamic (doubling) learning, and the skimming variants
//! for packing-only programs with unbounded item values.

mod otl;
mod schedule;
mod skim;

use serde::{Deserialize, Serialize};

pub use otl::{run_dla, run_otl, sampled_restriction_feasible, SampledLpCheck};
pub use schedule::PhaseSchedule;
pub use skim::{drop_top_check, estimate_tau, run_mdla, run_motl, skim_scale, DropTopReport, MdlaRun};

use crate::error::{Error, Result};
use crate::experts::LearnerKind;
use crate::reduction::{BreachPolicy, LpToLbConfig, PayoffBound};

/// Largest ε for which the load balancer's rate `√8·ε` stays in (0, 1].
pub const MAX_LB_EPS: f64 = 0.353_553_390_593_273_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub eps: f64,
    pub delta: f64,
    /// Caller-supplied stability bound; 1 for packing-only programs.
    pub sigma: f64,
    pub c1: f64,
    /// Upper limit on the ε handed to the reduction.
    pub eps0: f64,
    pub payoff: PayoffBound,
    pub learner: LearnerKind,
}

impl LearnerConfig {
    pub fn new(eps: f64, delta: f64) -> Self {
        LearnerConfig {
            eps,
            delta,
            sigma: 1.0,
            c1: crate::reduction::DEFAULT_C1,
            eps0: MAX_LB_EPS,
            payoff: PayoffBound::Sampled,
            learner: LearnerKind::MultiplicativeWeights,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_c1(mut self, c1: f64) -> Self {
        self.c1 = c1;
        self
    }

    pub fn with_payoff(mut self, payoff: PayoffBound) -> Self {
        self.payoff = payoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta <= self.eps) {
            return Err(Error::invalid(format!("delta must lie in (0, eps], got {}", self.delta)));
        }
        if !(self.sigma >= 1.0) {
            return Err(Error::invalid(format!("sigma must be at least 1, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Reduction settings for one segment run with rate `eps` against `opt_estimate`.
    pub(crate) fn reduction(&self, opt_estimate: f64, eps: f64) -> LpToLbConfig {
        LpToLbConfig::new(opt_estimate, eps, self.delta.min(eps))
            .with_c1(self.c1)
            .with_eps0(self.eps0.max(eps))
            .with_payoff(self.payoff)
            .with_breach_policy(BreachPolicy::Halt)
    }
}

/// Quantities estimated by the skimming pipeline in one segment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SkimEstimates {
    pub big_b: f64,
    pub tau_hat: f64,
    pub o_hat: f64,
    pub b_hat: Vec<f64>,
    pub eps_prime: f64,
    pub quarter_opt: f64,
    pub skim_opt: Option<f64>,
    /// Last step (absolute index) of the skimmed part before truncation.
    pub t_last: Option<usize>,
    pub high_value_taken: usize,
    pub budget_rejections: usize,
}

/// `ln((m+1)/δ)/ε²`.
pub fn big_b(m: usize, eps: f64, delta: f64) -> f64 {
    ((m + 1) as f64 / delta).ln() / (eps * eps)
}
