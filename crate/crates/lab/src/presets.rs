//! Named scenarios and sweep grids.

use crate::config::{
    AttackKind, AttackSection, BaselineSection, ControllerSection, Launch, ModeName,
    PopulationSection, ScenarioFile, SimulationSection, SupplySection, Units, WindowName,
};
use crate::sweep::Axis;

/// Houses on the simulated feeder.
pub const HOUSES: usize = 1405;
/// Feeder supply slope, kW per ($/MWh).
pub const HOUSE_P: f64 = 43.638;
/// Feeder supply intercept, kW.
pub const HOUSE_Q: f64 = 1287.0;
/// Per-house baseline range, kW.
pub const HOUSE_BASELINE_KW: (f64, f64) = (0.276, 0.488);
/// 22 days of half-hourly periods.
pub const HOUSE_HORIZON: usize = 1056;

fn region(eta: f64, elasticity: f64, attack: AttackSection, horizon: usize) -> ScenarioFile {
    ScenarioFile {
        units: Units::MW,
        supply: SupplySection {
            p: 152.0,
            q: 4503.0,
            scale: None,
        },
        population: PopulationSection::Aggregate {
            elasticity,
            scale: None,
            clearing_price: Some(20.0),
        },
        baseline: BaselineSection::Constant { value: 2000.0 },
        controller: ControllerSection {
            eta: Some(eta),
            mode: ModeName::Adaptive,
            operating_point: None,
            price_min: 1.0,
            price_max: 200.0,
            slope_error: 0.0,
        },
        attack,
        simulation: SimulationSection {
            period_hours: 0.5,
            horizon,
            initial_price: 21.0,
            seed: 0,
            feeder_rating: None,
            mean_h_window: WindowName::WholeRun,
        },
        output: None,
    }
}

fn single(
    kind: AttackKind,
    rho: f64,
    gamma: Option<f64>,
    tau: Option<usize>,
    launch: Launch,
) -> AttackSection {
    AttackSection {
        kind,
        rho: Some(rho),
        gamma,
        tau,
        launch,
        ..AttackSection::default()
    }
}

fn houses(attack: AttackSection) -> ScenarioFile {
    ScenarioFile {
        units: Units::KW,
        supply: SupplySection {
            p: HOUSE_P,
            q: HOUSE_Q,
            scale: None,
        },
        population: PopulationSection::Sampled {
            count: HOUSES,
            seed: None,
            scale_mean: None,
            scale_sd: None,
            elasticity_mean: None,
            elasticity_sd: None,
        },
        baseline: BaselineSection::Synthetic {
            per_house_min: HOUSE_BASELINE_KW.0,
            per_house_max: HOUSE_BASELINE_KW.1,
            house_count: HOUSES,
            days: 22,
        },
        controller: ControllerSection {
            eta: Some(0.5),
            mode: ModeName::Adaptive,
            operating_point: None,
            price_min: 1.0,
            price_max: 200.0,
            slope_error: 0.0,
        },
        attack,
        simulation: SimulationSection {
            period_hours: 0.5,
            horizon: HOUSE_HORIZON,
            initial_price: 20.0,
            seed: 1,
            feeder_rating: None,
            mean_h_window: WindowName::PostAttack,
        },
        output: None,
    }
}

/// House attacks go live one day after the honest loop settles, or on day 2.
fn house_attack(
    kind: AttackKind,
    rho: f64,
    gamma: Option<f64>,
    tau: Option<usize>,
) -> AttackSection {
    AttackSection {
        margin: 48,
        fallback: Some(96),
        ..single(kind, rho, gamma, tau, Launch::AfterConvergence)
    }
}

pub const NAMES: &[&str] = &[
    "direct-feedback-oscillation",
    "running-benign",
    "running-benign-high-gain",
    "running-scaling-057",
    "running-scaling-059",
    "running-delay-12",
    "running-delay-11",
    "houses-benign",
    "houses-scaling",
    "houses-delay-full",
    "houses-delay-partial",
];

pub fn scenario(name: &str) -> Option<ScenarioFile> {
    use AttackKind::{Delay, Scaling};
    let s = match name {
        "direct-feedback-oscillation" => {
            let mut s = region(0.5, -0.6, AttackSection::default(), 96);
            s.controller.mode = ModeName::DirectFeedback;
            s.controller.eta = None;
            s.controller.price_max = 100.0;
            s
        }
        "running-benign" => region(0.5, -0.8, AttackSection::default(), 96),
        "running-benign-high-gain" => region(0.8, -0.8, AttackSection::default(), 96),
        "running-scaling-057" => region(
            0.8,
            -0.8,
            single(Scaling, 1.0, Some(0.57), None, Launch::Period),
            96,
        ),
        "running-scaling-059" => region(
            0.8,
            -0.8,
            single(Scaling, 1.0, Some(0.59), None, Launch::Period),
            96,
        ),
        "running-delay-12" => region(
            0.2,
            -0.8,
            single(Delay, 1.0, None, Some(12), Launch::AfterConvergence),
            96,
        ),
        "running-delay-11" => region(
            0.2,
            -0.8,
            single(Delay, 1.0, None, Some(11), Launch::AfterConvergence),
            96,
        ),
        "houses-benign" => houses(AttackSection::default()),
        "houses-scaling" => houses(house_attack(Scaling, 0.65, Some(0.1), None)),
        "houses-delay-full" => houses(house_attack(Delay, 1.0, None, Some(9))),
        "houses-delay-partial" => houses(house_attack(Delay, 0.65, None, Some(24))),
        _ => return None,
    };
    Some(s)
}

/// A base scenario and the axes swept over it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPreset {
    pub base: &'static str,
    pub axes: Vec<Axis>,
}

pub const SWEEP_NAMES: &[&str] = &["houses-scaling-grid", "houses-delay-grid"];

pub fn sweep(name: &str) -> Option<SweepPreset> {
    let rhos = vec![0.25, 0.5, 0.65, 1.0];
    match name {
        "houses-scaling-grid" => Some(SweepPreset {
            base: "houses-scaling",
            axes: vec![
                Axis::floats("attack.rho", &rhos),
                Axis::floats(
                    "attack.gamma",
                    &(1..=10).map(|i| i as f64 / 10.0).collect::<Vec<_>>(),
                ),
            ],
        }),
        "houses-delay-grid" => Some(SweepPreset {
            base: "houses-delay-full",
            axes: vec![
                Axis::floats("attack.rho", &rhos),
                Axis::integers("attack.tau", 1..=24),
            ],
        }),
        _ => None,
    }
}
