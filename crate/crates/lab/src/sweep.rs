//! Parameter grids over a scenario.
//!
//! Every cell reuses the scenario's seed, so cells differ only in the swept
//! values and the output is the same whatever the worker count.

use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use crate::config::ScenarioFile;
use crate::error::{LabError, Result};
use crate::report::{evaluate, RunReport};

/// One swept key with its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

impl Axis {
    pub fn floats(key: &str, values: &[f64]) -> Self {
        Self {
            key: key.into(),
            values: values.iter().map(|&v| Value::from(v)).collect(),
        }
    }

    pub fn integers(key: &str, values: impl IntoIterator<Item = u64>) -> Self {
        Self {
            key: key.into(),
            values: values.into_iter().map(Value::from).collect(),
        }
    }

    /// Parses `key=v1,v2,...`, `key=a..b` (inclusive integers) or
    /// `key=start:step:end`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, rhs) = spec
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("sweep axis `{spec}` needs key=values")))?;
        let key = key.trim();
        let rhs = rhs.trim();
        if key.is_empty() {
            return Err(LabError::Config(format!("sweep axis `{spec}` has no key")));
        }
        let bad = || LabError::Config(format!("cannot read values `{rhs}` for `{key}`"));
        let values = if let Some((a, b)) = rhs.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            (a..=b).map(Value::from).collect()
        } else if rhs.matches(':').count() == 2 {
            let parts: Vec<f64> = rhs
                .split(':')
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let (start, step, end) = (parts[0], parts[1], parts[2]);
            if !(step > 0.0) || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            // Rounded to 12 digits so 0.1 steps print as 0.3, not 0.30000000000000004.
            (0..=n)
                .map(|i| Value::from(((start + step * i as f64) * 1e12).round() / 1e12))
                .collect()
        } else if rhs.is_empty() {
            Vec::new()
        } else {
            rhs.split(',').map(|t| scalar(t.trim())).collect()
        };
        Ok(Self {
            key: key.into(),
            values,
        })
    }
}

fn scalar(token: &str) -> Value {
    if let Ok(i) = token.parse::<u64>() {
        Value::from(i)
    } else if let Ok(x) = token.parse::<f64>() {
        Value::from(x)
    } else {
        Value::from(token)
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// The result of one grid cell.
#[derive(Debug, Clone)]
pub struct Cell {
    pub values: Vec<Value>,
    pub result: std::result::Result<RunReport, String>,
}

/// All combinations, first axis slowest.
pub fn grid(axes: &[Axis]) -> Result<Vec<Vec<Value>>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(LabError::Config("sweep grid is empty".into()));
    }
    let mut cells: Vec<Vec<Value>> = vec![Vec::new()];
    for axis in axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    Ok(cells)
}

/// Runs every cell on `workers` threads (0 picks the rayon default). Keys
/// are checked against the base scenario before anything runs.
pub fn run_sweep(
    base: &ScenarioFile,
    dir: &Path,
    axes: &[Axis],
    workers: usize,
) -> Result<Vec<Cell>> {
    let cells = grid(axes)?;
    let first = &cells[0];
    let mut probe = base.clone();
    for (axis, v) in axes.iter().zip(first) {
        probe = probe.with_value(&axis.key, v.clone())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .into_par_iter()
            .map(|values| {
                let result = (|| {
                    let mut s = base.clone();
                    for (axis, v) in axes.iter().zip(&values) {
                        s = s.with_value(&axis.key, v.clone())?;
                    }
                    let scn = s.build(dir)?;
                    Ok::<_, LabError>(evaluate(&scn)?.1)
                })()
                .map_err(|e| e.to_string());
                Cell { values, result }
            })
            .collect()
    }))
}

/// Writes one row per cell: the swept values, then `sigma_e`, `converged`,
/// `mean_h`, `outcome`, `attack_start` and `error` (empty on success).
pub fn write_sweep(path: &Path, axes: &[Axis], cells: &[Cell]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| LabError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut header: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
    header.extend(
        [
            "sigma_e",
            "converged",
            "mean_h",
            "outcome",
            "attack_start",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(csv_err)?;
    for c in cells {
        let mut row: Vec<String> = c.values.iter().map(render).collect();
        match &c.result {
            Ok(r) => row.extend([
                r.sigma_e.to_string(),
                r.converged.to_string(),
                r.mean_h.to_string(),
                format!("{:?}", r.outcome),
                r.attack_start.map_or(String::new(), |k| k.to_string()),
                String::new(),
            ]),
            Err(e) => row.extend([
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ]),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// A parsed sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<String>,
    pub sigma_e: Option<f64>,
    pub converged: Option<bool>,
    pub mean_h: Option<f64>,
    pub outcome: String,
    pub error: String,
}

/// Reads a sweep CSV written by [`write_sweep`] with `axis_count` leading columns.
pub fn read_sweep(path: &Path, axis_count: usize) -> Result<Vec<SweepRow>> {
    let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| LabError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| -> Result<Option<f64>> {
            let s = get(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| LabError::row(path, line, format!("bad number {s:?}")))
        };
        let n = axis_count;
        out.push(SweepRow {
            values: (0..n).map(get).collect(),
            sigma_e: num(n)?,
            converged: match get(n + 1).as_str() {
                "" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| LabError::row(path, line, format!("bad flag {s:?}")))?,
                ),
            },
            mean_h: num(n + 2)?,
            outcome: get(n + 3),
            error: get(n + 5),
        });
    }
    Ok(out)
}
