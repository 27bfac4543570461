use alloc::vec::Vec;

use crate::error::{Error, Result};

use super::SimTrace;

/// `|e_k| < CONVERGENCE_TOLERANCE · s(λ_k)` counts as settled.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Consecutive settled periods needed to declare convergence.
pub const CONVERGENCE_RUN: usize = 5;
/// Consecutive periods pinned to a price bound that count as divergence.
pub const PINNED_RUN: usize = 10;
/// `|e_k| > DIVERGENCE_FACTOR · s(λ*)` counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ConvergenceDetector {
    run: usize,
}

impl ConvergenceDetector {
    /// Feeds one period; true once the settled run is long enough.
    pub(crate) fn observe(&mut self, error: f64, supply: f64) -> bool {
        if error.abs() < CONVERGENCE_TOLERANCE * supply {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= CONVERGENCE_RUN
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DivergenceDetector {
    pinned: usize,
    limit: f64,
}

impl DivergenceDetector {
    pub(crate) fn new(reference_supply: f64) -> Self {
        Self {
            pinned: 0,
            limit: DIVERGENCE_FACTOR * reference_supply,
        }
    }

    pub(crate) fn observe(&mut self, error: f64, pinned: bool) -> bool {
        self.pinned = if pinned { self.pinned + 1 } else { 0 };
        self.pinned >= PINNED_RUN || error.abs() > self.limit || !error.is_finite()
    }
}

/// First period at which the convergence detector fires at or after `from`.
pub fn converged_at(trace: &SimTrace, from: usize) -> Option<usize> {
    let mut det = ConvergenceDetector::default();
    trace
        .records
        .iter()
        .skip(from)
        .find(|r| det.observe(r.error, r.supply_scheduled))
        .map(|r| r.k)
}

/// How the loop behaved after the attack launched (or from period 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The convergence detector holds over the final periods.
    Converged,
    /// Not settled yet, but the error envelope is shrinking.
    Converging,
    /// The error envelope neither grows nor shrinks (a limit cycle).
    Oscillating,
    /// The error envelope is growing.
    Diverging,
    /// The divergence detector fired.
    Diverged,
}

impl Outcome {
    /// Converged or on its way there.
    pub fn is_convergent(self) -> bool {
        matches!(self, Outcome::Converged | Outcome::Converging)
    }
}

/// Classifies the error sequence from the attack launch (or period 0).
///
/// Beyond the two detectors, the first third of the window is treated as
/// transient and the largest `|e|` over the middle and the last third are
/// compared: a ratio below 0.8 is converging, above 1.25 diverging, anything
/// else oscillating.
pub fn classify(trace: &SimTrace) -> Outcome {
    let from = trace.attack_start.unwrap_or(0);
    if trace.diverged_at.is_some_and(|k| k >= from) {
        return Outcome::Diverged;
    }
    let window = &trace.records[from.min(trace.records.len())..];
    if window.len() >= CONVERGENCE_RUN
        && window[window.len() - CONVERGENCE_RUN..]
            .iter()
            .all(|r| r.error.abs() < CONVERGENCE_TOLERANCE * r.supply_scheduled)
    {
        return Outcome::Converged;
    }
    let third = window.len() / 3;
    if third == 0 {
        return Outcome::Oscillating;
    }
    let peak = |rs: &[super::SimRecord]| rs.iter().fold(0.0f64, |m, r| m.max(r.error.abs()));
    let head = peak(&window[third..window.len() - third]);
    let tail = peak(&window[window.len() - third..]);
    if head == 0.0 {
        return if tail == 0.0 {
            Outcome::Converged
        } else {
            Outcome::Diverging
        };
    }
    let ratio = tail / head;
    if ratio < 0.8 {
        Outcome::Converging
    } else if ratio > 1.25 {
        Outcome::Diverging
    } else {
        Outcome::Oscillating
    }
}

/// Periods averaged by [`trajectory_mean_h`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanHWindow {
    /// Every simulated period.
    WholeRun,
    /// From the attack launch to the end (the whole run without an attack).
    PostAttack,
    /// Periods `start..end`.
    Range { start: usize, end: usize },
}

/// Mean of `h_k` over a window.
pub fn trajectory_mean_h(trace: &SimTrace, window: MeanHWindow) -> Result<f64> {
    let n = trace.records.len();
    let (a, b) = match window {
        MeanHWindow::WholeRun => (0, n),
        MeanHWindow::PostAttack => (trace.attack_start.unwrap_or(0), n),
        MeanHWindow::Range { start, end } => (start, end.min(n)),
    };
    if a >= b {
        return Err(Error::EmptyWindow("mean h"));
    }
    Ok(trace.records[a..b].iter().map(|r| r.h).sum::<f64>() / (b - a) as f64)
}

/// Population standard deviation of `e_k` for `k ≥ from`.
pub fn volatility(trace: &SimTrace, from: usize) -> Result<f64> {
    let xs: Vec<f64> = trace.records.iter().skip(from).map(|r| r.error).collect();
    if xs.is_empty() {
        return Err(Error::EmptyWindow("volatility"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Ok(libm::sqrt(
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n,
    ))
}

/// Feeder overload statistics for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayEvents {
    pub day: usize,
    /// Overloaded periods divided by periods per day.
    pub emergency_frequency: f64,
    /// Largest `(d_k − rating)/rating` in percent, 0 without overload.
    pub max_overload_pct: f64,
}

/// Per-day overload statistics of total demand against `rating`. A trailing
/// partial day is dropped.
pub fn feeder_events(
    trace: &SimTrace,
    rating: f64,
    periods_per_day: usize,
) -> Result<Vec<DayEvents>> {
    if !(rating.is_finite() && rating > 0.0) {
        return Err(Error::InvalidParameter {
            name: "feeder_rating",
            value: rating,
            reason: "must be finite and > 0",
        });
    }
    if periods_per_day == 0 || trace.records.len() < periods_per_day {
        return Err(Error::EmptyWindow(
            "feeder events need at least one full day",
        ));
    }
    Ok(trace
        .records
        .chunks_exact(periods_per_day)
        .enumerate()
        .map(|(day, rows)| {
            let mut count = 0usize;
            let mut worst = 0.0f64;
            for r in rows {
                let over = ((r.demand_total - rating) / rating).max(0.0) * 100.0;
                if over > 0.0 {
                    count += 1;
                }
                worst = worst.max(over);
            }
            DayEvents {
                day,
                emergency_frequency: count as f64 / periods_per_day as f64,
                max_overload_pct: worst,
            }
        })
        .collect())
}
