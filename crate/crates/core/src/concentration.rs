//! Tail bounds for sums sampled without replacement and for martingales,
//! with Monte-Carlo verifiers that compare them against simulated tails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Summary of a population and a sampling question about it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundQuery {
    pub n: usize,
    pub s: usize,
    pub mu: f64,
    pub sigma2: f64,
    /// Range bound `M`: values lie in `[0, M]`.
    pub range: f64,
    pub threshold: f64,
}

impl TailBoundQuery {
    pub fn new(n: usize, s: usize, mu: f64, sigma2: f64, range: f64, threshold: f64) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::invalid(format!("sample size {s} outside (0, {n}]")));
        }
        if !(range > 0.0) || !(sigma2 >= 0.0) || !(threshold >= 0.0) || !mu.is_finite() {
            return Err(Error::invalid("need M > 0, σ² ≥ 0, threshold ≥ 0"));
        }
        Ok(TailBoundQuery { n, s, mu, sigma2, range, threshold })
    }

    /// Mean and (population) variance of `values`, range = max value.
    pub fn from_population(values: &[f64], s: usize, threshold: f64) -> Result<Self> {
        let (mu, sigma2) = moments(values);
        let range = values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("population values must be nonnegative"));
        }
        Self::new(values.len(), s, mu, sigma2, range, threshold)
    }
}

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    (mu, var)
}

/// `min(1, 2·exp(−τ²/(2sσ² + τM)))` for `P(|Y_S − sμ| ≥ τ)`.
pub fn bernstein_wor(q: &TailBoundQuery) -> f64 {
    let tau = q.threshold;
    if tau <= 0.0 {
        return 1.0;
    }
    let denom = 2.0 * q.s as f64 * q.sigma2 + tau * q.range;
    (2.0 * (-tau * tau / denom).exp()).min(1.0)
}

/// The variance-free form `min(1, 2·exp(−min{τ²/(8Msμ), τ/(2M)}))`.
pub fn bernstein_wor_simple(q: &TailBoundQuery) -> f64 {
    let tau = q.threshold;
    if tau <= 0.0 {
        return 1.0;
    }
    let linear = tau / (2.0 * q.range);
    let quad_denom = 8.0 * q.range * q.s as f64 * q.mu;
    let expo = if quad_denom > 0.0 { (tau * tau / quad_denom).min(linear) } else { linear };
    (2.0 * (-expo).exp()).min(1.0)
}

/// `min(1, 30·exp(−(α/24)²/(2kσ² + α/24)))` for `P(max_{i≤k} |S_i − iμ| ≥ α)`,
/// values in `[0, 1]`, `k ≤ n/2`.
pub fn maximal_bernstein(q: &TailBoundQuery, k: usize) -> Result<f64> {
    if 2 * k > q.n {
        return Err(Error::invalid(format!("prefix length {k} exceeds n/2 = {}", q.n as f64 / 2.0)));
    }
    let a = q.threshold / 24.0;
    if a <= 0.0 {
        return Ok(1.0);
    }
    Ok((30.0 * (-(a * a) / (2.0 * k as f64 * q.sigma2 + a)).exp()).min(1.0))
}

/// `min(1, exp(−α²/(2σ² + 2Mα)))` for `P(X_n ≥ α and L ≤ σ²)`.
pub fn freedman(alpha: f64, sigma2: f64, m: f64) -> f64 {
    if alpha <= 0.0 {
        return 1.0;
    }
    (-(alpha * alpha) / (2.0 * sigma2 + 2.0 * m * alpha)).exp().min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    BernsteinWor,
    BernsteinWorSimple,
    MaximalBernstein,
    Freedman,
    /// `P(max prefix > λ) ≤ 15·P(|S_k| > λ/24)`.
    PrussFactor,
}

/// One grid point: a bound against its simulated tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierPoint {
    pub kind: BoundKind,
    pub params: String,
    pub bound: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl VerifierPoint {
    fn new(kind: BoundKind, params: String, bound: f64, hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        VerifierPoint {
            kind,
            params,
            bound,
            empirical: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Empirical tail ≤ bound + 3 standard errors.
    pub fn passes(&self) -> bool {
        self.empirical <= self.bound + 3.0 * self.std_error
    }
}

const CHUNK: usize = 4096;

/// Counts hits of `trial` over `trials` runs; chunked with per-chunk seeds so
/// the result does not depend on the thread count.
fn count_hits<S: Send>(
    trials: usize,
    seed: u64,
    init: impl Fn() -> S + Sync,
    trial: impl Fn(&mut rng::Rng, &mut S) -> bool + Sync,
) -> usize {
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = rng::seeded(rng::derive_seed(seed, c as u64));
            let mut state = init();
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len).filter(|_| trial(&mut g, &mut state)).count()
        })
        .sum()
}

/// Frequency of `|Y_S − sμ| ≥ τ` for a uniform `s`-subset of `population`.
pub fn simulate_wor_tail(population: &[f64], s: usize, tau: f64, trials: usize, seed: u64) -> f64 {
    let (mu, _) = moments(population);
    let hits = count_hits(
        trials,
        seed,
        || population.to_vec(),
        |g, pool| {
            rng::partial_shuffle(g, pool, s);
            let sum: f64 = pool[..s].iter().sum();
            (sum - s as f64 * mu).abs() >= tau
        },
    );
    hits as f64 / trials as f64
}

/// Frequencies of `max_{j≤k} |S_j − jμ| ≥ α` and of `|S_k − kμ| ≥ α/24`
/// (both `>` when `strict`).
fn simulate_prefix(population: &[f64], k: usize, alpha: f64, strict: bool, trials: usize, seed: u64) -> (usize, usize) {
    let (mu, _) = moments(population);
    let exceeds = |v: f64, t: f64| if strict { v > t } else { v >= t };
    let both = count_hits(
        trials,
        seed,
        || population.to_vec(),
        |g, pool| {
            rng::partial_shuffle(g, pool, k);
            let mut s = 0.0;
            let mut top: f64 = 0.0;
            for (j, v) in pool[..k].iter().enumerate() {
                s += v;
                top = top.max((s - (j + 1) as f64 * mu).abs());
            }
            exceeds(top, alpha)
        },
    );
    let end = count_hits(
        trials,
        seed ^ 0x5555_5555_5555_5555,
        || population.to_vec(),
        |g, pool| {
            rng::partial_shuffle(g, pool, k);
            let s: f64 = pool[..k].iter().sum();
            exceeds((s - k as f64 * mu).abs(), alpha / 24.0)
        },
    );
    (both, end)
}

/// Frequency of `max_{j≤k} |S_j − jμ| ≥ α`.
pub fn simulate_max_prefix(population: &[f64], k: usize, alpha: f64, trials: usize, seed: u64) -> f64 {
    simulate_prefix(population, k, alpha, false, trials, seed).0 as f64 / trials as f64
}

/// Martingale with differences `±c_t`, fair signs, where `c_t = M` while
/// `X_{t−1} ≤ 0` and `M/2` otherwise. Returns the frequency of
/// `X_n ≥ α and L ≤ σ²` with `L = Σ c_t²`.
pub fn simulate_freedman(steps: usize, m: f64, alpha: f64, sigma2: f64, trials: usize, seed: u64) -> f64 {
    let hits = count_hits(
        trials,
        seed,
        || (),
        |g, _| {
            let mut x = 0.0;
            let mut l = 0.0;
            let mut bits = 0u64;
            for t in 0..steps {
                if t % 64 == 0 {
                    bits = rand_core::RngCore::next_u64(g);
                }
                let c = if x <= 0.0 { m } else { m / 2.0 };
                l += c * c;
                x += if bits & 1 == 1 { c } else { -c };
                bits >>= 1;
            }
            x >= alpha && l <= sigma2
        },
    );
    hits as f64 / trials as f64
}

fn population(kind: usize, n: usize) -> (String, Vec<f64>) {
    match kind {
        0 => ("half-ones".into(), (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect()),
        1 => ("uniform-grid".into(), (0..n).map(|i| i as f64 / (n - 1) as f64).collect()),
        _ => ("tenth-ones".into(), (0..n).map(|i| if i % 10 == 0 { 1.0 } else { 0.0 }).collect()),
    }
}

/// Runs the verifier grid for `kind`: 20 parameter points, `trials`
/// simulations each.
pub fn verify_grid(kind: BoundKind, trials: usize, seed: u64) -> Result<Vec<VerifierPoint>> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let n = 1000;
    let mut out = Vec::with_capacity(20);
    match kind {
        BoundKind::BernsteinWor | BoundKind::BernsteinWorSimple => {
            for p in 0..20 {
                let (name, pop) = population(p % 3, n);
                let s = [50, 100, 200, 400][p % 4];
                let base = TailBoundQuery::from_population(&pop, s, 0.0)?;
                let sd = (s as f64 * base.sigma2).sqrt();
                let tau = sd * (0.5 + 0.3 * (p / 2) as f64);
                let q = TailBoundQuery { threshold: tau, ..base };
                let bound = if kind == BoundKind::BernsteinWor { bernstein_wor(&q) } else { bernstein_wor_simple(&q) };
                let point_seed = rng::derive_seed(seed, p as u64);
                let emp = simulate_wor_tail(&pop, s, tau, trials, point_seed);
                let hits = (emp * trials as f64).round() as usize;
                out.push(VerifierPoint::new(kind, format!("{name} n={n} s={s} tau={tau:.4}"), bound, hits, trials));
            }
        }
        BoundKind::MaximalBernstein | BoundKind::PrussFactor => {
            for p in 0..20 {
                let (name, pop) = population(p % 3, n);
                let k = [20, 60, 150, 300, 500][p % 5];
                let base = TailBoundQuery::from_population(&pop, k, 0.0)?;
                let sd = (k as f64 * base.sigma2).sqrt();
                let alpha = sd * (0.5 + 0.5 * (p / 2) as f64);
                let point_seed = rng::derive_seed(seed, p as u64);
                let strict = kind == BoundKind::PrussFactor;
                let (max_hits, end_hits) = simulate_prefix(&pop, k, alpha, strict, trials, point_seed);
                let (bound, hits) = if strict {
                    let p_end = end_hits as f64 / trials as f64;
                    let se_end = (p_end * (1.0 - p_end) / trials as f64).sqrt();
                    ((15.0 * (p_end + 3.0 * se_end)).min(1.0), max_hits)
                } else {
                    (maximal_bernstein(&TailBoundQuery { threshold: alpha, ..base }, k)?, max_hits)
                };
                out.push(VerifierPoint::new(kind, format!("{name} n={n} k={k} alpha={alpha:.4}"), bound, hits, trials));
            }
        }
        BoundKind::Freedman => {
            for p in 0..20 {
                let steps = [25, 50, 100, 200][p % 4];
                let m = 1.0;
                let sigma2 = steps as f64 * [0.5, 0.75, 1.0][p % 3];
                let alpha = (steps as f64).sqrt() * (0.5 + 0.35 * (p / 2) as f64);
                let bound = freedman(alpha, sigma2, m);
                let point_seed = rng::derive_seed(seed, p as u64);
                let emp = simulate_freedman(steps, m, alpha, sigma2, trials, point_seed);
                let hits = (emp * trials as f64).round() as usize;
                out.push(VerifierPoint::new(
                    kind,
                    format!("steps={steps} M={m} sigma2={sigma2} alpha={alpha:.4}"),
                    bound,
                    hits,
                    trials,
                ));
            }
        }
    }
    Ok(out)
}

/// Every grid, in a fixed order.
pub fn verify_all(trials: usize, seed: u64) -> Result<Vec<VerifierPoint>> {
    let kinds = [
        BoundKind::BernsteinWor,
        BoundKind::BernsteinWorSimple,
        BoundKind::MaximalBernstein,
        BoundKind::Freedman,
        BoundKind::PrussFactor,
    ];
    let mut out = Vec::new();
    for (i, kind) in kinds.into_iter().enumerate() {
        out.extend(verify_grid(kind, trials, rng::derive_seed(seed, i as u64))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: usize, mu: f64, sigma2: f64, m: f64, t: f64) -> TailBoundQuery {
        TailBoundQuery::new(1000, s, mu, sigma2, m, t).unwrap()
    }

    #[test]
    fn zero_threshold_is_vacuous() {
        assert_eq!(bernstein_wor(&q(10, 0.5, 0.25, 1.0, 0.0)), 1.0);
        assert_eq!(bernstein_wor_simple(&q(10, 0.5, 0.25, 1.0, 0.0)), 1.0);
        assert_eq!(maximal_bernstein(&q(10, 0.5, 0.25, 1.0, 0.0), 10).unwrap(), 1.0);
        assert_eq!(freedman(0.0, 5.0, 1.0), 1.0);
    }

    #[test]
    fn bernstein_arithmetic() {
        let v = bernstein_wor(&q(100, 0.5, 1.0, 1.0, 30.0));
        assert!((v - 2.0 * (-900.0f64 / 230.0).exp()).abs() < 1e-15);
        assert!((v - 0.0400).abs() < 1e-4);
    }

    #[test]
    fn simple_bernstein_arithmetic() {
        let v = bernstein_wor_simple(&q(100, 0.5, 0.25, 1.0, 20.0));
        assert!((v - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(bernstein_wor_simple(&q(100, 0.5, 0.25, 1.0, 1e6)) < 1e-300);
        let zero_mean = bernstein_wor_simple(&q(100, 0.0, 0.0, 1.0, 4.0));
        assert!((zero_mean - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn maximal_bernstein_arithmetic_and_guard() {
        let v = maximal_bernstein(&q(50, 0.5, 0.25, 1.0, 240.0), 50).unwrap();
        assert_eq!(v, 1.0);
        assert!(30.0 * (-100.0f64 / 35.0).exp() > 1.7);
        assert!(maximal_bernstein(&q(50, 0.5, 0.25, 1.0, 240.0), 501).is_err());
        assert!(maximal_bernstein(&q(50, 0.5, 0.25, 1.0, 240.0), 500).is_ok());
    }

    #[test]
    fn freedman_arithmetic() {
        let v = freedman(10.0, 5.0, 1.0);
        assert!((v - (-100.0f64 / 30.0).exp()).abs() < 1e-15);
        assert!((v - 0.0357).abs() < 1e-4);
    }

    #[test]
    fn simulations_are_seed_deterministic() {
        let pop: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let a = simulate_wor_tail(&pop, 20, 3.0, 10_000, 9);
        let b = simulate_wor_tail(&pop, 20, 3.0, 10_000, 9);
        assert_eq!(a, b);
        assert!(a > 0.0 && a < 1.0);
    }
}
