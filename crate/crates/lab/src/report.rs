use std::fmt::Write as _;

use rtp_core::attack::AttackSpec;
use rtp_core::sim::{
    classify, feeder_events, run, trajectory_mean_h, volatility, Baseline, DayEvents, Outcome,
    SimConfig, SimTrace,
};

use crate::config::{Scenario, Units};
use crate::error::Result;

/// Default feeder rating as a multiple of the benign run's peak demand.
pub const DEFAULT_RATING_FACTOR: f64 = 1.25;

/// With a time-varying baseline the error never settles to zero, so an
/// attacked run counts as converged when its post-launch `σ(e)` stays within
/// this factor of the benign run's `σ(e)` over the same periods.
pub const TRACE_CONVERGENCE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub outcome: Outcome,
    pub converged: bool,
    /// `σ(e)` from the attack launch (or period 0).
    pub sigma_e: f64,
    /// Same window, same config without the attack, for trace-driven runs.
    pub benign_sigma_e: Option<f64>,
    pub mean_h: f64,
    pub final_price: f64,
    pub attack_start: Option<usize>,
    pub feeder_rating: f64,
    pub days: Vec<DayEvents>,
}

fn benign(cfg: &SimConfig) -> SimConfig {
    SimConfig {
        attack: AttackSpec::none(),
        ..cfg.clone()
    }
}

/// Runs the scenario (and its benign twin when the rating or the
/// convergence call needs it) and summarises the result.
pub fn evaluate(scn: &Scenario) -> Result<(SimTrace, RunReport)> {
    let cfg = &scn.sim;
    let trace = run(cfg)?;
    let attacked = !cfg.attack.is_none();
    let trace_driven = matches!(cfg.baseline, Baseline::Trace(_));
    let twin = if attacked && (trace_driven || cfg.feeder_rating.is_none()) {
        Some(run(&benign(cfg))?)
    } else {
        None
    };
    let reference = twin.as_ref().unwrap_or(&trace);

    let from = trace.attack_start.unwrap_or(0);
    let sigma_e = volatility(&trace, from)?;
    let benign_sigma_e = match (&twin, trace_driven) {
        (Some(t), true) => Some(volatility(t, from)?),
        (None, true) => Some(sigma_e),
        _ => None,
    };
    let outcome = classify(&trace);
    let converged = match benign_sigma_e {
        Some(base) => trace.diverged_at.is_none() && sigma_e <= TRACE_CONVERGENCE_FACTOR * base,
        None => outcome == Outcome::Converged,
    };

    let feeder_rating = cfg.feeder_rating.unwrap_or_else(|| {
        DEFAULT_RATING_FACTOR
            * reference
                .records
                .iter()
                .map(|r| r.demand_total)
                .fold(0.0, f64::max)
    });
    let days = if trace.len() >= trace.periods_per_day {
        feeder_events(&trace, feeder_rating, trace.periods_per_day)?
    } else {
        Vec::new()
    };
    let report = RunReport {
        outcome,
        converged,
        sigma_e,
        benign_sigma_e,
        mean_h: trajectory_mean_h(&trace, scn.mean_h_window)?,
        final_price: trace.final_price().unwrap_or(f64::NAN),
        attack_start: trace.attack_start,
        feeder_rating,
        days,
    };
    Ok((trace, report))
}

impl RunReport {
    pub fn summary(&self, units: Units) -> String {
        let u = units.label();
        let mut s = String::new();
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "outcome: {:?}", self.outcome);
        let _ = writeln!(s, "final_price: {}", self.final_price);
        match self.attack_start {
            Some(k) => {
                let _ = writeln!(s, "attack_start: {k}");
            }
            None => {
                let _ = writeln!(s, "attack_start: none");
            }
        }
        let _ = writeln!(s, "sigma_e: {} {u}", self.sigma_e);
        if let Some(b) = self.benign_sigma_e {
            let _ = writeln!(s, "benign_sigma_e: {b} {u}");
        }
        let _ = writeln!(s, "mean_h: {}", self.mean_h);
        let _ = writeln!(s, "feeder_rating: {} {u}", self.feeder_rating);
        let hit = self
            .days
            .iter()
            .filter(|d| d.emergency_frequency > 0.0)
            .count();
        let _ = writeln!(s, "emergency_days: {hit} of {}", self.days.len());
        for d in self.days.iter().filter(|d| d.emergency_frequency > 0.0) {
            let _ = writeln!(
                s,
                "  day {}: frequency {}, max overload {}%",
                d.day, d.emergency_frequency, d.max_overload_pct
            );
        }
        s
    }
}
