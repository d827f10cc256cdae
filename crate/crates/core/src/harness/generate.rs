use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Block, PcmcLp};
use crate::oracle;
use crate::rng::{self, Rng};

/// Value pattern of the knapsack family; four items are its smallest member.
const KNAPSACK_VALUES: [f64; 4] = [10.0, 3.0, 1.0, 1.0];

/// Perturbation used when checking a stable instance.
pub const STABILITY_CHECK_EPS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Copies of a four-item knapsack, one unit of one row per item.
    PackingKnapsack,
    /// Dense multiple-choice packing/covering with a feasible `L(1 + 1/σ₀)`.
    PcmcStable,
    /// Single-choice packing with values `round(u^{−1/a})`.
    HeavyTailPacking,
    /// Zero-value instances whose packing matrices serve as machine loads.
    SchedulingLb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "one")]
    pub m_p: usize,
    #[serde(default)]
    pub m_c: usize,
    pub target_width: f64,
    #[serde(default = "two")]
    pub sigma0: f64,
    #[serde(default = "tail")]
    pub value_tail: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn two() -> f64 {
    2.0
}

fn tail() -> f64 {
    1.5
}

impl GenSpec {
    pub fn new(family: Family, n: usize, target_width: f64, seed: u64) -> Self {
        GenSpec {
            family,
            n,
            k: 1,
            m_p: 1,
            m_c: 0,
            target_width,
            sigma0: two(),
            value_tail: tail(),
            seed,
        }
    }

    pub fn with_shape(mut self, k: usize, m_p: usize, m_c: usize) -> Self {
        self.k = k;
        self.m_p = m_p;
        self.m_c = m_c;
        self
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> Self {
        self.sigma0 = sigma0;
        self
    }

    pub fn with_value_tail(mut self, a: f64) -> Self {
        self.value_tail = a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_width > 0.0 && self.target_width.is_finite()) {
            return Err(Error::invalid(format!("target_width must be positive, got {}", self.target_width)));
        }
        if self.n == 0 || self.k == 0 {
            return Err(Error::invalid("n and k must be positive"));
        }
        let single = |what: &str| -> Result<()> {
            if self.k != 1 || self.m_c != 0 || self.m_p == 0 {
                return Err(Error::invalid(format!("{what} needs k = 1, m_c = 0, m_p ≥ 1")));
            }
            Ok(())
        };
        match self.family {
            Family::PackingKnapsack => single("packing_knapsack"),
            Family::HeavyTailPacking => {
                single("heavy_tail_packing")?;
                if !(self.value_tail > 0.0) {
                    return Err(Error::invalid("value_tail must be positive"));
                }
                Ok(())
            }
            Family::PcmcStable => {
                if self.m_p == 0 {
                    return Err(Error::invalid("pcmc_stable needs at least one packing row"));
                }
                if !(self.sigma0 > 0.0) {
                    return Err(Error::invalid("sigma0 must be positive"));
                }
                Ok(())
            }
            Family::SchedulingLb => {
                if self.m_p == 0 || self.m_c != 0 {
                    return Err(Error::invalid("scheduling_lb needs m_p ≥ 1 machines and m_c = 0"));
                }
                Ok(())
            }
        }
    }
}

/// Sets every packing right-hand side to `target·max_t a_t` so the width
/// is exactly `target`.
fn pin_packing_width(blocks: &[Block], m_p: usize, target: f64) -> Result<Vec<f64>> {
    (0..m_p)
        .map(|i| {
            let top = blocks
                .iter()
                .flat_map(|blk| blk.a[i].iter().cloned())
                .fold(0.0, f64::max);
            if top > 0.0 {
                Ok(target * top)
            } else {
                Err(Error::Generation(format!("packing row {i} has no positive entry")))
            }
        })
        .collect()
}

fn knapsack(spec: &GenSpec) -> Result<PcmcLp> {
    let m = spec.m_p;
    let blocks: Vec<Block> = (0..spec.n)
        .map(|t| {
            let mut usage = vec![0.0; m];
            usage[t % m] = 1.0;
            Block::item(KNAPSACK_VALUES[t % 4], &usage)
        })
        .collect();
    if spec.n < m {
        return Err(Error::Generation(format!("{} items cannot touch all {m} rows", spec.n)));
    }
    let b = vec![spec.target_width; m];
    PcmcLp::new(1, m, 0, b, vec![], blocks)
}

fn heavy_tail(spec: &GenSpec, g: &mut Rng) -> Result<PcmcLp> {
    let m = spec.m_p;
    let blocks: Vec<Block> = (0..spec.n)
        .map(|_| {
            let u = 1.0 - rng::uniform01(g);
            let pi = u.powf(-1.0 / spec.value_tail).round();
            let usage: Vec<f64> = (0..m).map(|_| rng::uniform(g, 0.1, 1.0)).collect();
            Block::item(pi, &usage)
        })
        .collect();
    let b = pin_packing_width(&blocks, m, spec.target_width)?;
    PcmcLp::new(1, m, 0, b, vec![], blocks)
}

fn scheduling(spec: &GenSpec, g: &mut Rng) -> Result<PcmcLp> {
    let (m, k) = (spec.m_p, spec.k);
    let blocks: Vec<Block> = (0..spec.n)
        .map(|_| {
            let a = (0..m).map(|_| (0..k).map(|_| rng::uniform(g, 0.5, 1.0)).collect()).collect();
            Block::new(vec![0.0; k], a, vec![])
        })
        .collect();
    let b = pin_packing_width(&blocks, m, spec.target_width)?;
    PcmcLp::new(k, m, 0, b, vec![], blocks)
}

/// Packing entries are squared uniforms and covering entries lie in
/// `[0.5, 1]`. A uniform fractional point `x₀ = θ/k` that fits the packing
/// budget fixes `d = C x₀ / (1 + 1/σ₀)`, so `L(1 + 1/σ₀)` is feasible.
fn stable(spec: &GenSpec, g: &mut Rng) -> Result<PcmcLp> {
    let (k, m_p, m_c) = (spec.k, spec.m_p, spec.m_c);
    let blocks: Vec<Block> = (0..spec.n)
        .map(|_| {
            let pi = (0..k).map(|_| rng::uniform01(g)).collect();
            let a = (0..m_p)
                .map(|_| (0..k).map(|_| rng::uniform01(g).powi(2)).collect())
                .collect();
            let c = (0..m_c).map(|_| (0..k).map(|_| rng::uniform(g, 0.5, 1.0)).collect()).collect();
            Block::new(pi, a, c)
        })
        .collect();
    let b = pin_packing_width(&blocks, m_p, spec.target_width)?;
    let x0 = vec![1.0 / k as f64; k];
    let mut pack = vec![0.0; m_p];
    let mut cover = vec![0.0; m_c];
    for blk in &blocks {
        blk.add_packing_usage(&x0, &mut pack);
        blk.add_covering_usage(&x0, &mut cover);
    }
    let theta = pack
        .iter()
        .zip(&b)
        .filter(|(u, _)| **u > 0.0)
        .map(|(u, bi)| bi / u)
        .fold(1.0, f64::min);
    let d: Vec<f64> = cover.iter().map(|u| theta * u / (1.0 + 1.0 / spec.sigma0)).collect();
    let lp = PcmcLp::new(k, m_p, m_c, b, d, blocks)?;
    let w = lp.width_report(None)?.width;
    if w < spec.target_width * (1.0 - 1e-12) {
        return Err(Error::Generation(format!(
            "covering width {w:.4} falls below target {} for n = {}, σ₀ = {}",
            spec.target_width, spec.n, spec.sigma0
        )));
    }
    let sigma = oracle::stability_sigma(&lp, STABILITY_CHECK_EPS)?;
    if sigma > spec.sigma0 {
        return Err(Error::Generation(format!("oracle stability {sigma:.4} exceeds σ₀ = {}", spec.sigma0)));
    }
    Ok(lp)
}

/// Deterministic in `spec` (including its seed).
pub fn generate(spec: &GenSpec) -> Result<PcmcLp> {
    spec.validate()?;
    let mut g = rng::seeded(spec.seed);
    let lp = match spec.family {
        Family::PackingKnapsack => knapsack(spec)?,
        Family::HeavyTailPacking => heavy_tail(spec, &mut g)?,
        Family::SchedulingLb => scheduling(spec, &mut g)?,
        Family::PcmcStable => stable(spec, &mut g)?,
    };
    let w = lp.width_report(None)?.width;
    if !(w >= spec.target_width * (1.0 - 1e-12) && w <= 2.0 * spec.target_width * (1.0 + 1e-12)) {
        return Err(Error::Generation(format!("width {w} outside [{0}, 2·{0}]", spec.target_width)));
    }
    Ok(lp)
}

/// Uniform random arrival order (Fisher–Yates).
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::seeded(seed), &mut order);
    order
}

/// The blocks of `lp` in a seeded uniform random order.
pub fn permute(lp: &PcmcLp, seed: u64) -> impl Iterator<Item = &Block> + '_ {
    permutation(lp.n(), seed).into_iter().map(move |t| lp.block(t))
}
