//! Discrete-time simulation of the pricing loop.
//!
//! Each period `k` the operator publishes `λ_k`, compromised meters rewrite
//! it, consumers respond, and the scheduling error `e_k = s(λ_k) − d_k`
//! drives the next price.

mod engine;
mod metrics;
mod probability;

pub use engine::{run, Baseline, DemandSide, SimConfig, SimRecord, SimTrace};
pub use metrics::{
    classify, converged_at, feeder_events, trajectory_mean_h, volatility, DayEvents, MeanHWindow,
    Outcome, CONVERGENCE_RUN, CONVERGENCE_TOLERANCE, DIVERGENCE_FACTOR, PINNED_RUN,
};
pub use probability::{convergence_probability, ProbeLaw, ProbeSettings};
