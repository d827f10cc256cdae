//! Online packing/covering multiple-choice LPs in the random-order model.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod concentration;
pub mod error;
pub mod experts;
pub mod harness;
pub mod learners;
pub mod load_balancer;
pub mod lp;
pub mod oracle;
pub mod reduction;
pub mod rng;

pub use error::{Error, Result};
pub use lp::{Block, DecisionVector, PcmcLp};
