use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Doubling prefixes `S_i = {1, …, ⌊2^i·ε·n⌋}`, the last one forced to `[n]`,
/// with per-phase rates `ε_i = ε·√(n/|S_i|)`. Empty and repeated prefixes
/// are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub eps: f64,
    pub n: usize,
    pub sizes: Vec<usize>,
    pub rates: Vec<f64>,
}

impl PhaseSchedule {
    pub fn new(eps: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
        }
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let last = ((1.0 / eps).log2() - 1e-9).ceil().max(0.0) as u32;
        let mut sizes: Vec<usize> = Vec::new();
        for i in 0..=last {
            let s = if i == last {
                n
            } else {
                ((2f64.powi(i as i32) * eps * n as f64 + 1e-9).floor() as usize).min(n)
            };
            if s > 0 && sizes.last() != Some(&s) {
                sizes.push(s);
            }
        }
        let rates = sizes.iter().map(|&s| eps * (n as f64 / s as f64).sqrt()).collect();
        Ok(PhaseSchedule { eps, n, sizes, rates })
    }

    /// Number of learning phases (excludes the initial prefix).
    pub fn phases(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Half-open step range `[|S_{i−1}|, |S_i|)` decided by phase `i ≥ 1`.
    pub fn segment(&self, i: usize) -> (usize, usize) {
        (self.sizes[i - 1], self.sizes[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_schedule() {
        let s = PhaseSchedule::new(0.25, 64).unwrap();
        assert_eq!(s.sizes, vec![16, 32, 64]);
        assert!((s.rates[1] - (1.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((s.rates[2] - 0.25).abs() < 1e-15);
        assert_eq!(s.segment(1), (16, 32));
    }

    #[test]
    fn non_power_of_two_ends_at_n() {
        let s = PhaseSchedule::new(0.1, 100).unwrap();
        assert_eq!(s.sizes, vec![10, 20, 40, 80, 100]);
    }

    #[test]
    fn tiny_n_merges_duplicates() {
        let s = PhaseSchedule::new(0.25, 3).unwrap();
        assert_eq!(s.sizes, vec![1, 3]);
    }
}
