//! Instance generators, seeded random-order streaming and the Monte-Carlo
//! experiment driver.

mod experiment;
mod generate;

pub use experiment::{
    experiment, reference_value, thread_pool, Aggregates, Algorithm, InstanceSummary, RunConfig, RunReport, RunRow,
    MAKESPAN_SLACK, THREADS_ENV,
};
pub use generate::{generate, permutation, permute, Family, GenSpec, STABILITY_CHECK_EPS};
