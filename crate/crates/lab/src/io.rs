//! CSV ingestion and emission. Floats are written with `{}` formatting, which
//! is the shortest decimal that parses back to the same `f64`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rtp_core::models::{BaselineTrace, CeoDemand, Consumer, ConsumerPopulation};
use rtp_core::sim::{DayEvents, SimRecord, SimTrace};
use rtp_core::stability::StabilityBoundary;

use crate::error::{LabError, Result};

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y/%m/%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y/%m/%d %H:%M",
];

/// Hours since the first timestamp format we can match; plain numbers are
/// read as hours directly.
fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(h) = s.parse::<f64>() {
        return h.is_finite().then_some(h);
    }
    let epoch = NaiveDate::from_ymd_opt(2000, 1, 1)?.and_hms_opt(0, 0, 0)?;
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| (t - epoch).num_seconds() as f64 / 3600.0)
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    LabError::row(path, row, e.to_string())
}

fn header_index(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| LabError::Parse {
            path: path.to_path_buf(),
            message: format!(
                "missing column `{name}` (have: {})",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        })
}

fn field<T: std::str::FromStr>(
    path: &Path,
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line() as usize);
    let raw = rec
        .get(idx)
        .ok_or_else(|| LabError::row(path, line, format!("missing `{name}`")))?;
    raw.parse()
        .map_err(|_| LabError::row(path, line, format!("`{name}` = {raw:?} is not a number")))
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

/// Reads a `timestamp,value` trace sampled every `period_hours` and scales
/// each value by `per_house_scale · house_count`. Gaps, repeats and uneven
/// spacing are rejected with the row number.
pub fn load_baseline_trace(
    path: &Path,
    period_hours: f64,
    per_house_scale: f64,
    house_count: usize,
) -> Result<BaselineTrace> {
    if !(per_house_scale.is_finite() && per_house_scale >= 0.0) {
        return Err(LabError::Config(format!(
            "per_house_scale {per_house_scale} must be finite and >= 0"
        )));
    }
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let (ti, vi) = (
        header_index(path, &headers, "timestamp")?,
        header_index(path, &headers, "value")?,
    );
    let factor = per_house_scale * house_count as f64;
    let mut values = Vec::new();
    let mut prev: Option<f64> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let t = parse_timestamp(rec.get(ti).unwrap_or("")).ok_or_else(|| {
            LabError::row(
                path,
                line,
                format!("unreadable timestamp {:?}", rec.get(ti).unwrap_or("")),
            )
        })?;
        if let Some(p) = prev {
            let step = t - p;
            if (step - period_hours).abs() > 1e-6 {
                return Err(LabError::row(
                    path,
                    line,
                    format!("timestamp step of {step} h, expected {period_hours} h"),
                ));
            }
        }
        prev = Some(t);
        let v: f64 = field(path, &rec, vi, "value")?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(LabError::row(
                path,
                line,
                format!("value {v} must be finite and >= 0"),
            ));
        }
        values.push(v * factor);
    }
    if values.is_empty() {
        return Err(LabError::Parse {
            path: path.to_path_buf(),
            message: "no samples".into(),
        });
    }
    Ok(BaselineTrace::new(period_hours, values)?)
}

/// Writes `timestamp,value` with ISO timestamps from 2000-01-01T00:00:00.
pub fn write_baseline_trace(path: &Path, period_hours: f64, values: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    let epoch = NaiveDate::from_ymd_opt(2000, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    w.write_record(["timestamp", "value"])
        .map_err(|e| csv_err(path, e))?;
    for (k, v) in values.iter().enumerate() {
        let secs = (k as f64 * period_hours * 3600.0).round() as i64;
        let t = epoch + chrono::Duration::seconds(secs);
        w.write_record([t.format("%Y-%m-%dT%H:%M:%S").to_string(), v.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// `D,epsilon,baseline_scale,compromised`; `compromised` is 0 for honest
/// consumers and `g + 1` for attack group `g`.
pub fn read_population(path: &Path) -> Result<ConsumerPopulation> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = ["D", "epsilon", "baseline_scale", "compromised"]
        .iter()
        .map(|n| header_index(path, &headers, n))
        .collect::<Result<_>>()?;
    let mut consumers = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let d: f64 = field(path, &rec, idx[0], "D")?;
        let eps: f64 = field(path, &rec, idx[1], "epsilon")?;
        let baseline_scale: f64 = field(path, &rec, idx[2], "baseline_scale")?;
        let group: usize = field(path, &rec, idx[3], "compromised")?;
        let demand =
            CeoDemand::new(d, eps).map_err(|e| LabError::row(path, line, e.to_string()))?;
        consumers.push(Consumer {
            demand,
            baseline_scale,
            group: group.checked_sub(1),
        });
    }
    ConsumerPopulation::new(consumers).map_err(|e| LabError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_population(path: &Path, pop: &ConsumerPopulation) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["D", "epsilon", "baseline_scale", "compromised"])
        .map_err(|e| csv_err(path, e))?;
    for c in pop.consumers() {
        w.write_record([
            c.demand.scale().to_string(),
            c.demand.elasticity().to_string(),
            c.baseline_scale.to_string(),
            c.group.map_or(0, |g| g + 1).to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub const TRACE_HEADER: [&str; 10] = [
    "k",
    "lambda",
    "lambda_attacked",
    "b",
    "demand_honest",
    "demand_compromised",
    "demand_total",
    "supply_scheduled",
    "error",
    "h",
];

/// One row per period. `lambda_attacked` lists each group's price joined by
/// `;` and is empty without an attack.
pub fn write_trace(path: &Path, trace: &SimTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &trace.records {
        let attacked: Vec<String> = r.lambda_attacked.iter().map(|x| x.to_string()).collect();
        w.write_record([
            r.k.to_string(),
            r.lambda.to_string(),
            attacked.join(";"),
            r.baseline.to_string(),
            r.demand_honest.to_string(),
            r.demand_compromised.to_string(),
            r.demand_total.to_string(),
            r.supply_scheduled.to_string(),
            r.error.to_string(),
            r.h.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<SimRecord>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = TRACE_HEADER
        .iter()
        .map(|n| header_index(path, &headers, n))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let attacked_raw = rec.get(idx[2]).unwrap_or("");
        let lambda_attacked = if attacked_raw.is_empty() {
            Vec::new()
        } else {
            attacked_raw
                .split(';')
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        LabError::row(path, line, format!("bad lambda_attacked {s:?}"))
                    })
                })
                .collect::<Result<_>>()?
        };
        out.push(SimRecord {
            k: field(path, &rec, idx[0], "k")?,
            lambda: field(path, &rec, idx[1], "lambda")?,
            lambda_attacked,
            baseline: field(path, &rec, idx[3], "b")?,
            demand_honest: field(path, &rec, idx[4], "demand_honest")?,
            demand_compromised: field(path, &rec, idx[5], "demand_compromised")?,
            demand_total: field(path, &rec, idx[6], "demand_total")?,
            supply_scheduled: field(path, &rec, idx[7], "supply_scheduled")?,
            error: field(path, &rec, idx[8], "error")?,
            h: field(path, &rec, idx[9], "h")?,
        });
    }
    Ok(out)
}

pub fn write_metrics(path: &Path, days: &[DayEvents]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["day", "emergency_frequency", "max_overload_pct"])
        .map_err(|e| csv_err(path, e))?;
    for d in days {
        w.write_record([
            d.day.to_string(),
            d.emergency_frequency.to_string(),
            d.max_overload_pct.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<DayEvents>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = ["day", "emergency_frequency", "max_overload_pct"]
        .iter()
        .map(|n| header_index(path, &headers, n))
        .collect::<Result<_>>()?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            Ok(DayEvents {
                day: field(path, &rec, idx[0], "day")?,
                emergency_frequency: field(path, &rec, idx[1], "emergency_frequency")?,
                max_overload_pct: field(path, &rec, idx[2], "max_overload_pct")?,
            })
        })
        .collect()
}

/// `h,eta_bar`, where `eta_bar` is the end of the stable interval that starts
/// at zero gain.
pub fn write_boundary(path: &Path, boundary: &StabilityBoundary) -> Result<()> {
    let rows: Vec<(f64, f64)> = boundary.samples.iter().map(|s| (s.h, s.eta_bar)).collect();
    write_pairs(path, ["h", "eta_bar"], &rows)
}

pub fn read_boundary(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_pairs(path, ["h", "eta_bar"])
}

/// `price,supply` points for the supply fit; other columns are ignored.
pub fn read_supply_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_pairs(path, ["price", "supply"])
}

pub fn write_supply_points(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    write_pairs(path, ["price", "supply"], points)
}

fn write_pairs(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

fn read_pairs(path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let (a, b) = (
        header_index(path, &headers, header[0])?,
        header_index(path, &headers, header[1])?,
    );
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            Ok((
                field(path, &rec, a, header[0])?,
                field(path, &rec, b, header[1])?,
            ))
        })
        .collect()
}

/// One row of a limits table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub rho: f64,
    /// τ for delay families, γ for scaling.
    pub tau_or_gamma: f64,
    pub eta_limit: f64,
}

pub fn write_limits(path: &Path, rows: &[LimitRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["rho", "tau_or_gamma", "eta_limit"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.rho.to_string(),
            r.tau_or_gamma.to_string(),
            r.eta_limit.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_limits(path: &Path) -> Result<Vec<LimitRow>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = ["rho", "tau_or_gamma", "eta_limit"]
        .iter()
        .map(|n| header_index(path, &headers, n))
        .collect::<Result<_>>()?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            Ok(LimitRow {
                rho: field(path, &rec, idx[0], "rho")?,
                tau_or_gamma: field(path, &rec, idx[1], "tau_or_gamma")?,
                eta_limit: field(path, &rec, idx[2], "eta_limit")?,
            })
        })
        .collect()
}

/// Writes free text, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| LabError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| LabError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1.5"), Some(1.5));
        let a = parse_timestamp("2013/03/01 00:30:00").unwrap();
        let b = parse_timestamp("2013-03-01T01:00:00").unwrap();
        assert!((b - a - 0.5).abs() < 1e-12);
        assert_eq!(parse_timestamp("yesterday"), None);
    }
}
