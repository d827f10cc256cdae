#![allow(dead_code)]

use ro_lp::rng::{self, Rng};
use ro_lp::{Block, PcmcLp};

pub fn knapsack() -> PcmcLp {
    PcmcLp::packing(&[10.0, 3.0, 1.0, 1.0], &vec![vec![1.0]; 4], vec![2.0]).unwrap()
}

/// Single-choice packing instance with entries in `[0, 1]` and values in `[0, vmax]`.
pub fn random_packing(g: &mut Rng, n: usize, m: usize, vmax: f64) -> PcmcLp {
    let values: Vec<f64> = (0..n).map(|_| rng::uniform(g, 0.0, vmax)).collect();
    let usage: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng::uniform01(g)).collect()).collect();
    let b: Vec<f64> = (0..m).map(|_| rng::uniform(g, 1.0, n as f64 / 2.0)).collect();
    PcmcLp::packing(&values, &usage, b).unwrap()
}

/// Multiple-choice instance with covering rows made feasible by a uniform point.
pub fn random_pcmc(g: &mut Rng, n: usize, k: usize, m_p: usize, m_c: usize) -> PcmcLp {
    let blocks: Vec<Block> = (0..n)
        .map(|_| {
            Block::new(
                (0..k).map(|_| rng::uniform01(g)).collect(),
                (0..m_p).map(|_| (0..k).map(|_| rng::uniform01(g)).collect()).collect(),
                (0..m_c).map(|_| (0..k).map(|_| rng::uniform01(g)).collect()).collect(),
            )
        })
        .collect();
    let x0 = vec![0.5 / k as f64; k];
    let mut pack = vec![0.0; m_p];
    let mut cover = vec![0.0; m_c];
    for blk in &blocks {
        blk.add_packing_usage(&x0, &mut pack);
        blk.add_covering_usage(&x0, &mut cover);
    }
    let b = pack.iter().map(|u| u * 1.5 + 0.1).collect();
    let d = cover.iter().map(|u| u * 0.5).collect();
    PcmcLp::new(k, m_p, m_c, b, d, blocks).unwrap()
}

pub fn seeded(seed: u64) -> Rng {
    rng::seeded(seed)
}

pub const ADVERSARIAL_PATTERNS: usize = 10;

fn argmin(w: &[f64]) -> usize {
    (0..w.len()).fold(0, |best, i| if w[i] < w[best] { i } else { best })
}

fn argmax(w: &[f64]) -> usize {
    (0..w.len()).fold(0, |best, i| if w[i] > w[best] { i } else { best })
}

/// Payoff at step `t` of adversarial pattern `p`, reacting to the learner's
/// current `weights`. Entries lie in `[−bound, bound]`.
pub fn adversarial_payoff(p: usize, t: usize, weights: &[f64], bound: f64, g: &mut Rng) -> Vec<f64> {
    let m = weights.len();
    let mut o = vec![0.0; m];
    match p {
        0 => o[argmin(weights)] = bound,
        1 => {
            o.iter_mut().for_each(|v| *v = -bound);
            o[argmin(weights)] = bound;
        }
        2 => o[argmax(weights)] = -bound,
        3 => o[t % 2 % m] = bound,
        4 => o[(t / 10) % m] = bound,
        5 => o.iter_mut().for_each(|v| *v = if t.is_multiple_of(2) { bound } else { -bound }),
        6 => {
            o.iter_mut().for_each(|v| *v = if rng::below(g, 2) == 0 { bound } else { -bound });
            o[0] = bound / 2.0;
        }
        7 => {
            o.iter_mut().for_each(|v| *v = -bound);
            o[argmin(weights)] = 0.0;
        }
        8 => o[t % m] = bound,
        _ => o.iter_mut().for_each(|v| *v = if rng::below(g, 2) == 0 { bound } else { -bound }),
    }
    o
}
