//! Scenario files.
//!
//! A scenario is a sectioned TOML document (or the same structure as JSON,
//! chosen by the `.json` extension). Every section rejects unknown keys.
//!
//! ```toml
//! units = "MW"                 # "MW" for region scale, "kW" for house scale
//!
//! [supply]
//! p = 152.0                    # units per ($/MWh)
//! q = 4503.0                   # units
//!
//! [population]
//! kind = "aggregate"           # "aggregate" | "sampled" | "csv"
//! elasticity = -0.8
//! clearing_price = 20.0        # calibrates D against the mean baseline
//!
//! [baseline]
//! kind = "constant"            # "constant" | "csv" | "synthetic"
//! value = 2000.0
//!
//! [controller]
//! eta = 0.5
//! mode = "adaptive"            # "adaptive" | "fixed" | "direct-feedback"
//! price_min = 1.0
//! price_max = 200.0
//!
//! [attack]
//! kind = "delay"               # "none" | "scaling" | "delay" | "scaled-delay" | "composite"
//! rho = 1.0
//! tau = 12
//! launch = "after-convergence" # or "period" with `start = k`
//!
//! [simulation]
//! period_hours = 0.5
//! horizon = 96
//! initial_price = 21.0
//! ```
//!
//! Relative paths inside a scenario resolve against the scenario's directory.

use std::path::{Path, PathBuf};

use rtp_core::attack::{AttackGroup, AttackSpec, AttackStart, PriceTransform};
use rtp_core::controller::{ControllerConfig, ControllerMode, PriceBounds};
use rtp_core::models::{
    calibrate_demand_scale, BaselineTrace, CeoDemand, ConsumerPopulation, LinearSupply,
    PopulationDistribution,
};
use rtp_core::sim::{Baseline, DemandSide, MeanHWindow, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::io;
use crate::synthetic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub units: Units,
    pub supply: SupplySection,
    pub population: PopulationSection,
    pub baseline: BaselineSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub attack: AttackSection,
    pub simulation: SimulationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Units {
    MW,
    #[serde(rename = "kW")]
    KW,
}

impl Units {
    pub fn label(self) -> &'static str {
        match self {
            Units::MW => "MW",
            Units::KW => "kW",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplySection {
    pub p: f64,
    pub q: f64,
    /// Shrinks the region curve to a feeder before use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<SupplyScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyScale {
    pub houses: f64,
    pub share: f64,
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PopulationSection {
    /// One CEO curve; give exactly one of `scale` (D) and `clearing_price`.
    Aggregate {
        elasticity: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clearing_price: Option<f64>,
    },
    /// Houses drawn from truncated normals (defaults: D ~ N(7, 3.5²) kW cut
    /// at 0.5, ε ~ N(-0.8, 0.1²) cut to (-0.99, -0.01)).
    Sampled {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale_mean: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale_sd: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        elasticity_mean: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        elasticity_sd: Option<f64>,
    },
    /// `D,epsilon,baseline_scale,compromised` rows.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaselineSection {
    Constant {
        value: f64,
    },
    /// `timestamp,value` rows; each value becomes `value · per_house_scale · house_count`.
    Csv {
        path: PathBuf,
        #[serde(default = "one")]
        per_house_scale: f64,
        #[serde(default = "one_count")]
        house_count: usize,
    },
    /// Deterministic daily/weekly profile spanning `[per_house_min, per_house_max]`.
    Synthetic {
        per_house_min: f64,
        per_house_max: f64,
        house_count: usize,
        days: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn one_count() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Adaptive,
    Fixed,
    DirectFeedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub mode: ModeName,
    /// Fixed mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<f64>,
    pub price_min: f64,
    pub price_max: f64,
    /// Relative error `E_w` of the demand slope the controller believes in.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub slope_error: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    None,
    Scaling,
    Delay,
    ScaledDelay,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Launch {
    #[default]
    Period,
    AfterConvergence,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    pub kind: AttackKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSection>,
    #[serde(default)]
    pub launch: Launch,
    /// Launch period when `launch = "period"`.
    #[serde(default)]
    pub start: usize,
    /// Extra periods after convergence before launch.
    #[serde(default)]
    pub margin: usize,
    /// Launch here if the loop never converges first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub kind: AttackKind,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowName {
    WholeRun,
    #[default]
    PostAttack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub period_hours: f64,
    pub horizon: usize,
    pub initial_price: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to 1.25 times the peak demand of the same run without attack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feeder_rating: Option<f64>,
    /// Periods averaged for the reported mean `h`.
    #[serde(default)]
    pub mean_h_window: WindowName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

/// A scenario with every path resolved and every model built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub units: Units,
    pub sim: SimConfig,
    pub mean_h_window: MeanHWindow,
    pub output_dir: Option<PathBuf>,
    /// Smallest and largest per-house baseline over the horizon, for traces
    /// built from per-house data.
    pub baseline_per_house: Option<(f64, f64)>,
}

fn config_err(e: impl std::fmt::Display) -> LabError {
    LabError::Config(e.to_string())
}

impl ScenarioFile {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let parsed = if path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("json"))
        {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| LabError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Returns a copy with the dotted key (`attack.rho`, `controller.eta`, ...)
    /// set to `value`. The result is re-parsed, so unknown keys are rejected.
    pub fn with_value(&self, key: &str, value: serde_json::Value) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("scenario serialises");
        let mut slot = &mut doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let obj = slot.as_object_mut().ok_or_else(|| {
                LabError::Config(format!("`{key}`: `{part}` is not inside a section"))
            })?;
            if i + 1 == parts.len() {
                obj.insert((*part).to_string(), value.clone());
                break;
            }
            slot = obj
                .get_mut(*part)
                .ok_or_else(|| LabError::Config(format!("`{key}`: no section `{part}`")))?;
        }
        serde_json::from_value(doc).map_err(|e| LabError::Config(format!("`{key}`: {e}")))
    }

    /// Resolves paths against `base` and builds the simulation config.
    pub fn build(&self, base: &Path) -> Result<Scenario> {
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let sim = &self.simulation;

        let mut supply = LinearSupply::new(self.supply.p, self.supply.q).map_err(config_err)?;
        if let Some(s) = self.supply.scale {
            supply = supply
                .scaled_to(s.houses, s.share, s.population)
                .map_err(config_err)?;
        }

        let baseline = match &self.baseline {
            BaselineSection::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(LabError::Config(format!(
                        "baseline value {value} must be finite and >= 0"
                    )));
                }
                Baseline::Constant(*value)
            }
            BaselineSection::Csv {
                path,
                per_house_scale,
                house_count,
            } => Baseline::Trace(io::load_baseline_trace(
                &resolve(path),
                sim.period_hours,
                *per_house_scale,
                *house_count,
            )?),
            BaselineSection::Synthetic {
                per_house_min,
                per_house_max,
                house_count,
                days,
            } => {
                let raw = synthetic::daily_profile(
                    sim.period_hours,
                    *days,
                    *per_house_min,
                    *per_house_max,
                )?;
                Baseline::Trace(
                    BaselineTrace::new(sim.period_hours, raw)
                        .and_then(|t| t.scaled(*house_count as f64))
                        .map_err(config_err)?,
                )
            }
        };
        if let Baseline::Trace(t) = &baseline {
            if t.len() < sim.horizon {
                return Err(LabError::Config(format!(
                    "baseline trace has {} periods but the horizon is {}",
                    t.len(),
                    sim.horizon
                )));
            }
        }
        let houses = match &self.baseline {
            BaselineSection::Csv { house_count, .. }
            | BaselineSection::Synthetic { house_count, .. } => Some(*house_count),
            BaselineSection::Constant { .. } => None,
        };
        let baseline_per_house = match (&baseline, houses) {
            (Baseline::Trace(t), Some(n)) if n > 0 => {
                let v = &t.values()[..sim.horizon];
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some((lo / n as f64, hi / n as f64))
            }
            _ => None,
        };
        let mean_b = match &baseline {
            Baseline::Constant(b) => *b,
            Baseline::Trace(t) => {
                t.values()[..sim.horizon].iter().sum::<f64>() / sim.horizon as f64
            }
        };

        let demand =
            match &self.population {
                PopulationSection::Aggregate {
                    elasticity,
                    scale,
                    clearing_price,
                } => match (scale, clearing_price) {
                    (Some(d), None) => {
                        DemandSide::Aggregate(CeoDemand::new(*d, *elasticity).map_err(config_err)?)
                    }
                    (None, Some(ls)) => DemandSide::Aggregate(
                        calibrate_demand_scale(&supply, mean_b, *ls, *elasticity)
                            .map_err(config_err)?,
                    ),
                    _ => return Err(LabError::Config(
                        "aggregate population needs exactly one of `scale` and `clearing_price`"
                            .into(),
                    )),
                },
                PopulationSection::Sampled {
                    count,
                    seed,
                    scale_mean,
                    scale_sd,
                    elasticity_mean,
                    elasticity_sd,
                } => {
                    let d = PopulationDistribution::HOUSES_KW;
                    let dist = PopulationDistribution {
                        scale_mean: scale_mean.unwrap_or(d.scale_mean),
                        scale_sd: scale_sd.unwrap_or(d.scale_sd),
                        elasticity_mean: elasticity_mean.unwrap_or(d.elasticity_mean),
                        elasticity_sd: elasticity_sd.unwrap_or(d.elasticity_sd),
                        ..d
                    };
                    DemandSide::Population(
                        ConsumerPopulation::sample(*count, &dist, 1.0, seed.unwrap_or(sim.seed))
                            .map_err(config_err)?,
                    )
                }
                PopulationSection::Csv { path } => {
                    DemandSide::Population(io::read_population(&resolve(path))?)
                }
            };

        let c = &self.controller;
        let bounds = PriceBounds::new(c.price_min, c.price_max).map_err(config_err)?;
        let mode = match (c.mode, c.operating_point) {
            (ModeName::Adaptive, None) => ControllerMode::Adaptive,
            (ModeName::Fixed, Some(lambda_o)) => ControllerMode::Fixed { lambda_o },
            (ModeName::DirectFeedback, None) => ControllerMode::DirectFeedback,
            (ModeName::Fixed, None) => {
                return Err(LabError::Config(
                    "fixed mode needs `operating_point`".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(LabError::Config(
                    "`operating_point` only applies to fixed mode".into(),
                ))
            }
        };
        let eta = match (c.mode, c.eta) {
            (ModeName::DirectFeedback, None) => 0.5,
            (ModeName::DirectFeedback, Some(_)) => {
                return Err(LabError::Config("direct feedback takes no `eta`".into()))
            }
            (_, Some(eta)) => eta,
            (_, None) => return Err(LabError::Config("controller needs `eta`".into())),
        };
        let controller =
            ControllerConfig::new(eta, mode, bounds, c.slope_error).map_err(config_err)?;

        let attack = self.attack.build()?;
        let cfg = SimConfig {
            period_hours: sim.period_hours,
            horizon: sim.horizon,
            supply,
            demand,
            baseline,
            controller,
            attack,
            initial_price: sim.initial_price,
            seed: sim.seed,
            feeder_rating: sim.feeder_rating,
        };
        cfg.validate().map_err(config_err)?;
        Ok(Scenario {
            units: self.units,
            sim: cfg,
            mean_h_window: match sim.mean_h_window {
                WindowName::WholeRun => MeanHWindow::WholeRun,
                WindowName::PostAttack => MeanHWindow::PostAttack,
            },
            output_dir: self.output.as_ref().map(|o| resolve(&o.dir)),
            baseline_per_house,
        })
    }
}

fn transform(kind: AttackKind, gamma: Option<f64>, tau: Option<usize>) -> Result<PriceTransform> {
    let t = match (kind, gamma, tau) {
        (AttackKind::Scaling, Some(gamma), None) => PriceTransform::Scaling { gamma },
        (AttackKind::Delay, None, Some(tau)) => PriceTransform::Delay { tau },
        (AttackKind::ScaledDelay, Some(gamma), Some(tau)) => {
            PriceTransform::ScaledDelay { gamma, tau }
        }
        (AttackKind::Scaling, ..) => {
            return Err(LabError::Config("scaling takes `gamma` only".into()))
        }
        (AttackKind::Delay, ..) => return Err(LabError::Config("delay takes `tau` only".into())),
        (AttackKind::ScaledDelay, ..) => {
            return Err(LabError::Config(
                "scaled-delay takes `gamma` and `tau`".into(),
            ))
        }
        (AttackKind::None | AttackKind::Composite, ..) => {
            return Err(LabError::Config(format!(
                "`{kind:?}` is not a price transform"
            )))
        }
    };
    t.validate().map_err(config_err)?;
    Ok(t)
}

impl AttackSection {
    pub fn build(&self) -> Result<AttackSpec> {
        let start = match self.launch {
            Launch::Period => {
                if self.margin != 0 || self.fallback.is_some() {
                    return Err(LabError::Config(
                        "`margin` and `fallback` need launch = \"after-convergence\"".into(),
                    ));
                }
                AttackStart::Period(self.start)
            }
            Launch::AfterConvergence => {
                if self.start != 0 {
                    return Err(LabError::Config("`start` needs launch = \"period\"".into()));
                }
                AttackStart::AfterConvergence {
                    margin: self.margin,
                    fallback: self.fallback,
                }
            }
        };
        let groups = match self.kind {
            AttackKind::None => {
                if self.rho.is_some()
                    || self.gamma.is_some()
                    || self.tau.is_some()
                    || !self.groups.is_empty()
                {
                    return Err(LabError::Config(
                        "attack kind \"none\" takes no parameters".into(),
                    ));
                }
                return Ok(AttackSpec::none());
            }
            AttackKind::Composite => {
                if self.rho.is_some() || self.gamma.is_some() || self.tau.is_some() {
                    return Err(LabError::Config(
                        "composite attacks take parameters per group".into(),
                    ));
                }
                if self.groups.is_empty() {
                    return Err(LabError::Config("composite attack needs `groups`".into()));
                }
                self.groups
                    .iter()
                    .map(|g| {
                        Ok(AttackGroup {
                            fraction: g.rho,
                            transform: transform(g.kind, g.gamma, g.tau)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            kind => {
                if !self.groups.is_empty() {
                    return Err(LabError::Config(
                        "`groups` needs kind = \"composite\"".into(),
                    ));
                }
                let rho = self
                    .rho
                    .ok_or_else(|| LabError::Config("attack needs `rho`".into()))?;
                vec![AttackGroup {
                    fraction: rho,
                    transform: transform(kind, self.gamma, self.tau)?,
                }]
            }
        };
        AttackSpec::new(groups, start).map_err(config_err)
    }
}
