//! Packing/covering multiple-choice LP instances and the pure transformations
//! used by the online algorithms: restriction to a column subset, covering
//! relaxation, width measures, skimming of high-value items and top-K removal.
//!
//! The program is
//!
//! ```text
//! max  Σ_t ⟨π^t, x^t⟩
//! s.t. Σ_t A^t x^t ≤ b        (m_p packing rows)
//!      Σ_t C^t x^t ≥ d        (m_c covering rows)
//!      x^t ∈ {x ∈ [0,1]^k : Σ_j x_j ≤ 1}   for every block t
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{self, LpStatus};

/// Absolute slack tolerance used by every feasibility check.
pub const FEAS_TOL: f64 = 1e-9;
/// Relative tolerance used when comparing objective values.
pub const VALUE_RTOL: f64 = 1e-6;

/// One column block `(π^t, A^t, C^t)`; `a` is `m_p × k`, `c` is `m_c × k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub pi: Vec<f64>,
    #[serde(rename = "A", default)]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "C", default)]
    pub c: Vec<Vec<f64>>,
}

impl Block {
    pub fn new(pi: Vec<f64>, a: Vec<Vec<f64>>, c: Vec<Vec<f64>>) -> Self {
        Block { pi, a, c }
    }

    /// Single-choice packing column: value `pi`, resource usage `a`.
    pub fn item(pi: f64, a: &[f64]) -> Self {
        Block {
            pi: vec![pi],
            a: a.iter().map(|&v| vec![v]).collect(),
            c: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    /// `⟨π, x⟩`
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.pi, x)
    }

    /// Adds `A x` to `acc`.
    pub fn add_packing_usage(&self, x: &[f64], acc: &mut [f64]) {
        for (row, out) in self.a.iter().zip(acc.iter_mut()) {
            *out += dot(row, x);
        }
    }

    /// Adds `C x` to `acc`.
    pub fn add_covering_usage(&self, x: &[f64], acc: &mut [f64]) {
        for (row, out) in self.c.iter().zip(acc.iter_mut()) {
            *out += dot(row, x);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A point of the full simplex `{x ∈ [0,1]^k : Σ x ≤ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub x: Vec<f64>,
}

impl DecisionVector {
    pub fn zeros(k: usize) -> Self {
        DecisionVector { x: vec![0.0; k] }
    }

    pub fn is_valid(&self) -> bool {
        self.x.iter().all(|&v| v.is_finite() && (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v))
            && self.x.iter().sum::<f64>() <= 1.0 + FEAS_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLp", into = "RawLp")]
pub struct PcmcLp {
    n: usize,
    k: usize,
    m_p: usize,
    m_c: usize,
    b: Vec<f64>,
    d: Vec<f64>,
    blocks: Vec<Block>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawLp {
    n: usize,
    k: usize,
    m_p: usize,
    m_c: usize,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(default)]
    d: Vec<f64>,
    blocks: Vec<Block>,
}

impl TryFrom<RawLp> for PcmcLp {
    type Error = Error;

    fn try_from(raw: RawLp) -> Result<Self> {
        let lp = PcmcLp {
            n: raw.n,
            k: raw.k,
            m_p: raw.m_p,
            m_c: raw.m_c,
            b: raw.b,
            d: raw.d,
            blocks: raw.blocks,
        };
        lp.validate()?;
        Ok(lp)
    }
}

impl From<PcmcLp> for RawLp {
    fn from(lp: PcmcLp) -> Self {
        RawLp {
            n: lp.n,
            k: lp.k,
            m_p: lp.m_p,
            m_c: lp.m_c,
            b: lp.b,
            d: lp.d,
            blocks: lp.blocks,
        }
    }
}

/// Which ratio attains the width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitingCoordinate {
    Packing { row: usize, block: usize, choice: usize },
    Covering { row: usize, block: usize, choice: usize },
    Value { block: usize, choice: usize },
    /// Every denominator is zero.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub width: f64,
    pub generalized_width: f64,
    pub limiting_coordinate: LimitingCoordinate,
}

/// Result of skimming: the residual LP and the items taken outright.
#[derive(Clone, Debug, PartialEq)]
pub struct Skimmed {
    pub lp: PcmcLp,
    /// `{t : π_t > τ}` in index order.
    pub high_value: Vec<usize>,
    /// Packing rows whose residual right-hand side went negative.
    pub negative_rhs_rows: Vec<usize>,
}

impl Skimmed {
    pub fn high_value_total(&self, original: &PcmcLp) -> f64 {
        self.high_value.iter().map(|&t| original.blocks[t].pi[0]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodThresholdReport {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub skim_opt: Option<f64>,
    pub high_value_total: f64,
    pub opt: f64,
    pub diagnostic: Option<String>,
}

impl GoodThresholdReport {
    pub fn is_good(&self) -> bool {
        self.s1 && self.s2 && self.s3
    }
}

impl PcmcLp {
    /// Builds and validates an instance.
    pub fn new(k: usize, m_p: usize, m_c: usize, b: Vec<f64>, d: Vec<f64>, blocks: Vec<Block>) -> Result<Self> {
        let lp = PcmcLp {
            n: blocks.len(),
            k,
            m_p,
            m_c,
            b,
            d,
            blocks,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Packing-only single-choice instance: column `t` is `(values[t], usage[t])`.
    pub fn packing(values: &[f64], usage: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        if values.len() != usage.len() {
            return Err(Error::invalid("values and usage lengths differ"));
        }
        let blocks = values.iter().zip(usage).map(|(&v, a)| Block::item(v, a)).collect();
        let m_p = b.len();
        Self::new(1, m_p, 0, b, Vec::new(), blocks)
    }

    /// Skips validation; used for intermediate programs whose right-hand
    /// side may legitimately be negative (skimming with a bad threshold).
    pub(crate) fn from_parts_unchecked(k: usize, m_p: usize, m_c: usize, b: Vec<f64>, d: Vec<f64>, blocks: Vec<Block>) -> Self {
        PcmcLp {
            n: blocks.len(),
            k,
            m_p,
            m_c,
            b,
            d,
            blocks,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m_p(&self) -> usize {
        self.m_p
    }
    pub fn m_c(&self) -> usize {
        self.m_c
    }
    /// Total number of packing plus covering rows.
    pub fn m(&self) -> usize {
        self.m_p + self.m_c
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn d(&self) -> &[f64] {
        &self.d
    }
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
    pub fn block(&self, t: usize) -> &Block {
        &self.blocks[t]
    }
    pub fn is_packing_only(&self) -> bool {
        self.m_c == 0
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::invalid("n and k must be at least 1"));
        }
        if self.m_p + self.m_c == 0 {
            return Err(Error::invalid("at least one packing or covering row is required"));
        }
        if self.blocks.len() != self.n {
            return Err(Error::invalid(format!("n = {} but {} blocks supplied", self.n, self.blocks.len())));
        }
        if self.b.len() != self.m_p {
            return Err(Error::invalid(format!("b has length {}, expected m_p = {}", self.b.len(), self.m_p)));
        }
        if self.d.len() != self.m_c {
            return Err(Error::invalid(format!("d has length {}, expected m_c = {}", self.d.len(), self.m_c)));
        }
        let bad = |v: f64| !v.is_finite() || v < 0.0;
        if let Some(i) = self.b.iter().position(|&v| bad(v)) {
            return Err(Error::invalid(format!("b[{i}] = {} is not a finite nonnegative real", self.b[i])));
        }
        if let Some(i) = self.d.iter().position(|&v| bad(v)) {
            return Err(Error::invalid(format!("d[{i}] = {} is not a finite nonnegative real", self.d[i])));
        }
        for (t, blk) in self.blocks.iter().enumerate() {
            if blk.pi.len() != self.k {
                return Err(Error::invalid(format!("block {t}: pi has length {}, expected k = {}", blk.pi.len(), self.k)));
            }
            if blk.a.len() != self.m_p || blk.a.iter().any(|r| r.len() != self.k) {
                return Err(Error::invalid(format!("block {t}: A must be {}x{}", self.m_p, self.k)));
            }
            if blk.c.len() != self.m_c || blk.c.iter().any(|r| r.len() != self.k) {
                return Err(Error::invalid(format!("block {t}: C must be {}x{}", self.m_c, self.k)));
            }
            if let Some(j) = blk.pi.iter().position(|&v| bad(v)) {
                return Err(Error::invalid(format!("block {t}: pi[{j}] = {} is not a finite nonnegative real", blk.pi[j])));
            }
            for (name, mat) in [("A", &blk.a), ("C", &blk.c)] {
                for (i, row) in mat.iter().enumerate() {
                    if let Some(j) = row.iter().position(|&v| bad(v)) {
                        return Err(Error::invalid(format!(
                            "block {t}: {name}[{i}][{j}] = {} is not a finite nonnegative real",
                            row[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Restricted LP on the blocks of `index_set` (kept in the given order),
    /// with right-hand sides scaled by `|I|/n`.
    pub fn restrict(&self, index_set: &[usize]) -> Result<PcmcLp> {
        if index_set.is_empty() {
            return Err(Error::invalid("restriction to an empty index set"));
        }
        if let Some(&t) = index_set.iter().find(|&&t| t >= self.n) {
            return Err(Error::invalid(format!("block index {t} out of range (n = {})", self.n)));
        }
        let blocks: Vec<Block> = index_set.iter().map(|&t| self.blocks[t].clone()).collect();
        Ok(self.restrict_blocks(blocks))
    }

    /// Restricted LP over an explicit block list, as seen by an online
    /// algorithm that has buffered arrivals. RHS scales by `len/n`.
    pub(crate) fn restrict_blocks(&self, blocks: Vec<Block>) -> PcmcLp {
        let frac = blocks.len() as f64 / self.n as f64;
        PcmcLp::from_parts_unchecked(
            self.k,
            self.m_p,
            self.m_c,
            self.b.iter().map(|v| v * frac).collect(),
            self.d.iter().map(|v| v * frac).collect(),
            blocks,
        )
    }

    /// `L(1−ε)`: covering right-hand side multiplied by `1 − eps`.
    pub fn scale_covering(&self, eps: f64) -> Result<PcmcLp> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::invalid(format!("eps = {eps} outside [0, 1)")));
        }
        let mut out = self.clone();
        out.d.iter_mut().for_each(|v| *v *= 1.0 - eps);
        Ok(out)
    }

    pub fn width_report(&self, opt: Option<f64>) -> Result<WidthReport> {
        if let Some(o) = opt {
            if !(o > 0.0) {
                return Err(Error::invalid(format!("opt = {o} must be positive")));
            }
        }
        let mut width = f64::INFINITY;
        let mut limiting = LimitingCoordinate::Unbounded;
        for (t, blk) in self.blocks.iter().enumerate() {
            for (i, row) in blk.a.iter().enumerate() {
                for (j, &a) in row.iter().enumerate() {
                    if a > 0.0 && self.b[i] / a < width {
                        width = self.b[i] / a;
                        limiting = LimitingCoordinate::Packing { row: i, block: t, choice: j };
                    }
                }
            }
            for (i, row) in blk.c.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if c > 0.0 && self.d[i] / c < width {
                        width = self.d[i] / c;
                        limiting = LimitingCoordinate::Covering { row: i, block: t, choice: j };
                    }
                }
            }
        }
        let mut generalized = width;
        let mut gen_limiting = limiting;
        if let Some(o) = opt {
            for (t, blk) in self.blocks.iter().enumerate() {
                for (j, &p) in blk.pi.iter().enumerate() {
                    if p > 0.0 && o / p < generalized {
                        generalized = o / p;
                        gen_limiting = LimitingCoordinate::Value { block: t, choice: j };
                    }
                }
            }
        }
        Ok(WidthReport {
            width,
            generalized_width: generalized,
            limiting_coordinate: if opt.is_some() { gen_limiting } else { limiting },
        })
    }

    fn require_single_choice_packing(&self, what: &str) -> Result<()> {
        if self.m_c > 0 || self.k > 1 {
            return Err(Error::UnsupportedShape(format!(
                "{what} needs a packing-only single-choice LP (got m_c = {}, k = {})",
                self.m_c, self.k
            )));
        }
        Ok(())
    }

    /// Takes every item with `π_t > tau`: zeroes its value and deducts its
    /// usage from the right-hand side.
    pub fn skim(&self, tau: f64) -> Result<Skimmed> {
        self.require_single_choice_packing("skim")?;
        let mut blocks = self.blocks.clone();
        let mut rhs = self.b.clone();
        let mut high_value = Vec::new();
        for (t, blk) in blocks.iter_mut().enumerate() {
            if blk.pi[0] > tau {
                high_value.push(t);
                blk.pi[0] = 0.0;
                for (r, row) in rhs.iter_mut().zip(&blk.a) {
                    *r -= row[0];
                }
            }
        }
        let negative_rhs_rows = rhs.iter().enumerate().filter(|(_, &v)| v < 0.0).map(|(i, _)| i).collect();
        Ok(Skimmed {
            lp: PcmcLp::from_parts_unchecked(1, self.m_p, 0, rhs, Vec::new(), blocks),
            high_value,
            negative_rhs_rows,
        })
    }

    /// `L_{<K}`: zero the values of the `count` highest-valued items; equal
    /// values are ranked by lower index first.
    pub fn drop_top_k(&self, count: usize) -> Result<PcmcLp> {
        self.require_single_choice_packing("drop_top_k")?;
        if count > self.n {
            return Err(Error::invalid(format!("K = {count} exceeds n = {}", self.n)));
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&s, &t| self.blocks[t].pi[0].total_cmp(&self.blocks[s].pi[0]).then(s.cmp(&t)));
        let mut out = self.clone();
        for &t in order.iter().take(count) {
            out.blocks[t].pi[0] = 0.0;
        }
        Ok(out)
    }

    /// Evaluates conditions S1–S3 of a `delta_param`-good skimming threshold.
    /// `big_b` is the scale `ln((m+1)/δ)/ε²`.
    pub fn check_good_threshold(&self, tau: f64, delta_param: f64, eps: f64, big_b: f64) -> Result<GoodThresholdReport> {
        self.require_single_choice_packing("check_good_threshold")?;
        if !(big_b > 0.0) {
            return Err(Error::invalid("B must be positive"));
        }
        let opt = match oracle::solve(self)? {
            r if r.status == LpStatus::Optimal => r.value,
            _ => return Err(Error::Infeasible("the unskimmed LP is infeasible".into())),
        };
        let skimmed = self.skim(tau)?;
        let high_value_total = skimmed.high_value_total(self);
        let s2 = skimmed.lp.b.iter().zip(&self.b).all(|(&s, &o)| s >= 0.5 * o - FEAS_TOL);
        let s3 = tau <= 24.0 * delta_param / big_b;
        let (s1, skim_opt, diagnostic) = if !skimmed.negative_rhs_rows.is_empty() {
            (
                false,
                None,
                Some(format!("skimmed LP infeasible: negative RHS in rows {:?}", skimmed.negative_rhs_rows)),
            )
        } else {
            let res = oracle::solve(&skimmed.lp)?;
            if res.status == LpStatus::Optimal {
                let lhs = res.value + high_value_total;
                let ok = lhs >= (1.0 - eps) * opt - VALUE_RTOL * (1.0 + opt.abs());
                (ok, Some(res.value), None)
            } else {
                (false, None, Some("skimmed LP infeasible".into()))
            }
        };
        Ok(GoodThresholdReport {
            s1,
            s2,
            s3,
            skim_opt,
            high_value_total,
            opt,
            diagnostic,
        })
    }

    /// Objective value of a full solution.
    pub fn value_of(&self, x: &[DecisionVector]) -> f64 {
        self.blocks.iter().zip(x).map(|(b, v)| b.value(&v.x)).sum()
    }

    /// `(Σ A^t x^t, Σ C^t x^t)`
    pub fn usage_of(&self, x: &[DecisionVector]) -> (Vec<f64>, Vec<f64>) {
        let mut pack = vec![0.0; self.m_p];
        let mut cover = vec![0.0; self.m_c];
        for (blk, v) in self.blocks.iter().zip(x) {
            blk.add_packing_usage(&v.x, &mut pack);
            blk.add_covering_usage(&v.x, &mut cover);
        }
        (pack, cover)
    }

    /// Feasibility within the absolute slack tolerance.
    pub fn is_feasible(&self, x: &[DecisionVector]) -> bool {
        self.is_eps_feasible(x, 0.0)
    }

    /// Packing satisfied, covering satisfied up to `(1 − eps)`.
    pub fn is_eps_feasible(&self, x: &[DecisionVector], eps: f64) -> bool {
        if x.len() != self.n || x.iter().any(|v| v.x.len() != self.k || !v.is_valid()) {
            return false;
        }
        let (pack, cover) = self.usage_of(x);
        pack.iter().zip(&self.b).all(|(u, b)| *u <= b + FEAS_TOL)
            && cover.iter().zip(&self.d).all(|(u, d)| *u >= (1.0 - eps) * d - FEAS_TOL)
    }
}
