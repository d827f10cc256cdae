//! Prediction with experts, maximization form.
//!
//! The default learner is multiplicative weights with the linear update
//! `w_i ← w_i·(1 + η·o_i/M)`. Against payoffs in `[−M, M]^m` it guarantees
//!
//! ```text
//! Σ_t ⟨w^t, o^t⟩ ≥ max_j (Σ_t o^t_j − η·Σ_t |o^t_j|) − M·ln(m)/η
//! ```
//!
//! which [`ExpertsState::certify`] re-checks on an observed history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed on the payoff bound.
const PAYOFF_SLACK: f64 = 1e-9;

/// An online learner over `m` experts.
pub trait Learner {
    fn num_experts(&self) -> usize;
    /// Current normalized weights.
    fn weights(&self) -> &[f64];
    fn observe(&mut self, payoff: &[f64]) -> Result<()>;
    /// Back to the initial state, keeping parameters.
    fn restart(&mut self);
    /// `(α, R)` when the learner has an (α, R)-regret guarantee.
    fn regret_parameters(&self) -> Option<(f64, f64)>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpertsState {
    weights: Vec<f64>,
    eta: f64,
    payoff_bound: f64,
    t: usize,
    cumulative_reward: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCertificate {
    pub alpha: f64,
    pub r: f64,
    pub achieved: f64,
    pub benchmark: f64,
}

impl RegretCertificate {
    /// `achieved ≥ benchmark − R`, up to floating slack relative to the sums.
    pub fn holds(&self) -> bool {
        let scale = 1.0 + self.achieved.abs().max(self.benchmark.abs());
        self.achieved >= self.benchmark - self.r - 1e-9 * scale
    }

    pub fn margin(&self) -> f64 {
        self.achieved - (self.benchmark - self.r)
    }
}

fn check_params(m: usize, eta: f64, payoff_bound: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("need at least one expert"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("learning rate must lie in (0,1], got {eta}")));
    }
    if !(payoff_bound > 0.0 && payoff_bound.is_finite()) {
        return Err(Error::invalid(format!("payoff bound must be positive, got {payoff_bound}")));
    }
    Ok(())
}

fn check_payoff(payoff: &[f64], m: usize, bound: f64) -> Result<()> {
    if payoff.len() != m {
        return Err(Error::invalid(format!("payoff has {} coordinates, expected {m}", payoff.len())));
    }
    let limit = bound * (1.0 + PAYOFF_SLACK);
    for (i, &o) in payoff.iter().enumerate() {
        if !(o.abs() <= limit) {
            return Err(Error::invalid(format!("payoff coordinate {i} = {o} exceeds the bound {bound}")));
        }
    }
    Ok(())
}

fn normalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    if s > 0.0 && s.is_finite() {
        w.iter_mut().for_each(|v| *v /= s);
    } else {
        // Every weight was driven to zero (η = 1, payoff −M everywhere).
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|v| *v = u);
    }
}

impl ExpertsState {
    pub fn init(m: usize, eta: f64, payoff_bound: f64) -> Result<Self> {
        check_params(m, eta, payoff_bound)?;
        Ok(ExpertsState {
            weights: vec![1.0 / m as f64; m],
            eta,
            payoff_bound,
            t: 0,
            cumulative_reward: 0.0,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn payoff_bound(&self) -> f64 {
        self.payoff_bound
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    /// `M·ln(m)/η`.
    pub fn regret_term(&self) -> f64 {
        self.payoff_bound * (self.weights.len() as f64).ln() / self.eta
    }

    /// Functional form of [`Learner::observe`].
    pub fn observed(mut self, payoff: &[f64]) -> Result<Self> {
        Learner::observe(&mut self, payoff)?;
        Ok(self)
    }

    /// Recomputes the benchmark on `history` and packages the regret check.
    pub fn certify(&self, history: &[Vec<f64>]) -> Result<RegretCertificate> {
        if history.len() != self.t {
            return Err(Error::invalid(format!(
                "history has {} steps but the state has observed {}",
                history.len(),
                self.t
            )));
        }
        Ok(RegretCertificate {
            alpha: self.eta,
            r: self.regret_term(),
            achieved: self.cumulative_reward,
            benchmark: regret_benchmark(history, self.eta, self.weights.len())?,
        })
    }
}

impl Learner for ExpertsState {
    fn num_experts(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn observe(&mut self, payoff: &[f64]) -> Result<()> {
        check_payoff(payoff, self.weights.len(), self.payoff_bound)?;
        let mut reward = 0.0;
        for (w, &o) in self.weights.iter_mut().zip(payoff) {
            reward += *w * o;
            *w = (*w * (1.0 + self.eta * o / self.payoff_bound)).max(0.0);
        }
        normalize(&mut self.weights);
        self.cumulative_reward += reward;
        self.t += 1;
        Ok(())
    }

    fn restart(&mut self) {
        let m = self.weights.len();
        self.weights = vec![1.0 / m as f64; m];
        self.t = 0;
        self.cumulative_reward = 0.0;
    }

    fn regret_parameters(&self) -> Option<(f64, f64)> {
        Some((self.eta, self.regret_term()))
    }
}

/// `max_j (Σ_t o^t_j − α·Σ_t |o^t_j|)`; no absolute value on the outside, so
/// the result may be negative. Zero for an empty history.
pub fn regret_benchmark(history: &[Vec<f64>], alpha: f64, m: usize) -> Result<f64> {
    if history.is_empty() {
        return Ok(0.0);
    }
    let mut acc = vec![0.0; m];
    for o in history {
        if o.len() != m {
            return Err(Error::invalid("payoff vectors in the history differ in length"));
        }
        for (a, &v) in acc.iter_mut().zip(o) {
            *a += v - alpha * v.abs();
        }
    }
    Ok(acc.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Hedge: weights proportional to `exp(η·Σ_s o^s_i / M)`.
///
/// Offered as an alternate learner. Its standard guarantee is not of the
/// `(α, R)` form above, so [`Learner::regret_parameters`] returns `None`.
#[derive(Clone, Debug)]
pub struct ExponentialWeights {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    eta: f64,
    payoff_bound: f64,
}

impl ExponentialWeights {
    pub fn new(m: usize, eta: f64, payoff_bound: f64) -> Result<Self> {
        check_params(m, eta, payoff_bound)?;
        Ok(ExponentialWeights {
            log_weights: vec![0.0; m],
            weights: vec![1.0 / m as f64; m],
            eta,
            payoff_bound,
        })
    }
}

impl Learner for ExponentialWeights {
    fn num_experts(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn observe(&mut self, payoff: &[f64]) -> Result<()> {
        check_payoff(payoff, self.weights.len(), self.payoff_bound)?;
        for (lw, &o) in self.log_weights.iter_mut().zip(payoff) {
            *lw += self.eta * o / self.payoff_bound;
        }
        let top = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (w, &lw) in self.weights.iter_mut().zip(&self.log_weights) {
            *w = (lw - top).exp();
        }
        normalize(&mut self.weights);
        Ok(())
    }

    fn restart(&mut self) {
        let m = self.weights.len();
        self.log_weights = vec![0.0; m];
        self.weights = vec![1.0 / m as f64; m];
    }

    fn regret_parameters(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    #[default]
    MultiplicativeWeights,
    ExponentialWeights,
}

impl LearnerKind {
    pub fn build(self, m: usize, eta: f64, payoff_bound: f64) -> Result<Box<dyn Learner + Send>> {
        Ok(match self {
            LearnerKind::MultiplicativeWeights => Box::new(ExpertsState::init(m, eta, payoff_bound)?),
            LearnerKind::ExponentialWeights => Box::new(ExponentialWeights::new(m, eta, payoff_bound)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_expert_stays_put() {
        let mut s = ExpertsState::init(1, 0.3, 2.0).unwrap();
        for o in [1.5, -2.0, 0.0] {
            s.observe(&[o]).unwrap();
            assert_eq!(s.weights(), &[1.0]);
        }
    }

    #[test]
    fn uniform_start() {
        let s = ExpertsState::init(4, 0.1, 1.0).unwrap();
        assert_eq!(s.weights(), &[0.25; 4]);
    }

    #[test]
    fn regret_term_formula() {
        let s = ExpertsState::init(2, 0.5, 1.0).unwrap();
        assert!((s.regret_term() - 2.0f64.ln() / 0.5).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(ExpertsState::init(0, 0.5, 1.0).is_err());
        assert!(ExpertsState::init(2, 0.0, 1.0).is_err());
        assert!(ExpertsState::init(2, 1.5, 1.0).is_err());
        assert!(ExpertsState::init(2, 0.5, 0.0).is_err());
        assert!(ExpertsState::init(2, 1.0, 1.0).is_ok());
    }

    #[test]
    fn out_of_range_payoff_names_coordinate() {
        let mut s = ExpertsState::init(3, 0.5, 1.0).unwrap();
        let err = s.observe(&[0.0, 0.5, 1.5]).unwrap_err().to_string();
        assert!(err.contains("coordinate 2"), "{err}");
    }

    #[test]
    fn zero_and_constant_payoffs() {
        let mut s = ExpertsState::init(3, 0.5, 1.0).unwrap();
        s.observe(&[0.3, -0.2, 0.9]).unwrap();
        let before = s.weights().to_vec();
        let r0 = s.cumulative_reward();
        s.observe(&[0.0; 3]).unwrap();
        assert_eq!(s.weights(), &before[..]);
        assert_eq!(s.cumulative_reward(), r0);
        s.observe(&[0.4; 3]).unwrap();
        for (a, b) in s.weights().iter().zip(&before) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((s.cumulative_reward() - r0 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn eta_one_zeroes_weight_for_good() {
        let mut s = ExpertsState::init(2, 1.0, 1.0).unwrap();
        s.observe(&[-1.0, 0.0]).unwrap();
        assert_eq!(s.weights(), &[0.0, 1.0]);
        s.observe(&[1.0, 0.0]).unwrap();
        assert_eq!(s.weights()[0], 0.0);
    }

    #[test]
    fn history_length_must_match() {
        let s = ExpertsState::init(2, 0.5, 1.0).unwrap().observed(&[1.0, 0.0]).unwrap();
        assert!(s.certify(&[]).is_err());
    }

    #[test]
    fn exponential_weights_prefers_the_winner() {
        let mut e = ExponentialWeights::new(2, 0.5, 1.0).unwrap();
        e.observe(&[1.0, 0.0]).unwrap();
        let w = e.weights();
        assert!((w[0] / w[1] - 0.5f64.exp()).abs() < 1e-12);
        assert!(e.regret_parameters().is_none());
        e.restart();
        assert_eq!(e.weights(), &[0.5, 0.5]);
    }
}
