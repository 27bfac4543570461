//! Stand-in for a measured half-hourly load trace.

use std::f64::consts::TAU;

use crate::error::{LabError, Result};

fn bump(hour: f64, centre: f64, width: f64) -> f64 {
    // Wrapped distance, so evening bumps spill over midnight.
    let d = (hour - centre + 12.0).rem_euclid(24.0) - 12.0;
    (-0.5 * (d / width).powi(2)).exp()
}

/// A deterministic per-house baseline: morning and evening peaks, a night
/// trough, lighter weekends and a slow drift across days, min-max scaled so
/// the samples span exactly `[min, max]`.
pub fn daily_profile(period_hours: f64, days: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    if !(period_hours > 0.0 && (24.0 / period_hours).fract() == 0.0) {
        return Err(LabError::Config(format!(
            "period of {period_hours} h does not divide a day"
        )));
    }
    if days == 0 || !(min >= 0.0 && max > min) {
        return Err(LabError::Config(format!(
            "synthetic baseline needs days >= 1 and 0 <= min < max, got {days} days, [{min}, {max}]"
        )));
    }
    let per_day = (24.0 / period_hours) as usize;
    let raw: Vec<f64> = (0..days * per_day)
        .map(|k| {
            let t = k as f64 * period_hours;
            let day = (t / 24.0).floor();
            let hour = t - 24.0 * day;
            let weekend = if (day as usize) % 7 >= 5 { 0.92 } else { 1.0 };
            let drift = 1.0 + 0.06 * (TAU * day / 17.0).sin();
            let shape = 1.0 + 0.35 * bump(hour, 7.5, 1.6) + 0.6 * bump(hour, 18.5, 2.2)
                - 0.25 * bump(hour, 3.5, 2.5);
            shape * weekend * drift
        })
        .collect();
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(raw
        .iter()
        .map(|v| min + (max - min) * (v - lo) / (hi - lo))
        .collect())
}
