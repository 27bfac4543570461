use crate::controller::{
    direct_feedback_update, stabilizing_update, ControllerConfig, PriceBounds,
};
use crate::error::{Error, Result};
use crate::models::{calibrate_demand_scale, DemandModel, LinearSupply, SupplyModel};

use super::metrics::ConvergenceDetector;

/// Pricing rule probed by [`convergence_probability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeLaw {
    /// `λ_k = s⁻¹(d_{k−1})`.
    DirectFeedback,
    /// The adaptive proportional controller with gain `eta`.
    Stabilizing { eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    pub bounds: PriceBounds,
    /// Number of initial prices, evenly spaced over the bounds inclusive.
    pub initial_prices: usize,
    pub max_periods: usize,
}

/// Fraction of initial prices from which the loop converges, for a CEO
/// demand calibrated so that `λ*` clears the market with constant baseline `b`.
pub fn convergence_probability(
    supply: &LinearSupply,
    baseline: f64,
    elasticity: f64,
    lambda_star: f64,
    law: ProbeLaw,
    settings: &ProbeSettings,
) -> Result<f64> {
    let w = calibrate_demand_scale(supply, baseline, lambda_star, elasticity)?;
    let n = settings.initial_prices;
    if n == 0 {
        return Err(Error::InvalidConfig(
            "need at least one initial price".into(),
        ));
    }
    let bounds = settings.bounds;
    let ctrl = match law {
        ProbeLaw::Stabilizing { eta } => Some(ControllerConfig::adaptive(eta, bounds)?),
        ProbeLaw::DirectFeedback => None,
    };
    let mut hits = 0usize;
    for i in 0..n {
        let mut lambda = if n == 1 {
            bounds.min()
        } else {
            bounds.min() + (bounds.max() - bounds.min()) * i as f64 / (n - 1) as f64
        };
        let mut det = ConvergenceDetector::default();
        for _ in 0..settings.max_periods {
            let d = baseline + w.demand(lambda)?;
            let s = supply.supply(lambda)?;
            let e = s - d;
            if det.observe(e, s) {
                hits += 1;
                break;
            }
            lambda = match &ctrl {
                None => match direct_feedback_update(supply, d, &bounds) {
                    Ok(p) => p,
                    Err(Error::SupplyInverseDomain { .. }) => bounds.min(),
                    Err(err) => return Err(err),
                },
                Some(c) => stabilizing_update(c, lambda, e, &w, supply)?,
            };
        }
    }
    Ok(hits as f64 / n as f64)
}
