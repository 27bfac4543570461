use alloc::format;
use alloc::vec::Vec;

use crate::attack::{apply_attack, AttackSpec, AttackStart};
use crate::controller::{
    direct_feedback_update, stabilizing_update, ControllerConfig, ControllerMode,
};
use crate::error::{Error, Result};
use crate::models::{
    clearing_price, marginal_ratio, BaselineTrace, CeoDemand, ConsumerPopulation, DemandBreakdown,
    DemandModel, LinearSupply, SupplyModel,
};

use super::metrics::{ConvergenceDetector, DivergenceDetector};

/// Who consumes: one aggregate CEO curve split by attack-group fractions, or
/// an explicit population whose members carry their group.
#[derive(Debug, Clone, PartialEq)]
pub enum DemandSide {
    Aggregate(CeoDemand),
    Population(ConsumerPopulation),
}

impl DemandSide {
    fn breakdown(
        &self,
        baseline: f64,
        lambda: f64,
        attacked: &[f64],
        fractions: &[f64],
    ) -> Result<DemandBreakdown> {
        match self {
            DemandSide::Aggregate(w) => {
                let mut compromised = 0.0;
                let mut share = 0.0;
                for (price, f) in attacked.iter().zip(fractions) {
                    compromised += f * w.demand(*price)?;
                    share += f;
                }
                let honest = (1.0 - share) * w.demand(lambda)?;
                Ok(DemandBreakdown {
                    baseline,
                    honest,
                    compromised,
                    total: baseline + honest + compromised,
                })
            }
            DemandSide::Population(pop) => pop.aggregate_demand(baseline, lambda, attacked),
        }
    }

    fn slope(&self, price: f64) -> Result<f64> {
        match self {
            DemandSide::Aggregate(w) => w.slope(price),
            DemandSide::Population(pop) => pop.slope(price),
        }
    }
}

impl DemandModel for DemandSide {
    fn demand(&self, price: f64) -> Result<f64> {
        match self {
            DemandSide::Aggregate(w) => w.demand(price),
            DemandSide::Population(pop) => pop.demand(price),
        }
    }

    fn slope(&self, price: f64) -> Result<f64> {
        DemandSide::slope(self, price)
    }
}

/// Price-independent demand.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Constant(f64),
    /// Already in total (not per-house) units.
    Trace(BaselineTrace),
}

impl Baseline {
    fn at(&self, k: usize) -> f64 {
        match self {
            Baseline::Constant(b) => *b,
            Baseline::Trace(t) => t.values()[k],
        }
    }

    fn mean(&self, horizon: usize) -> f64 {
        match self {
            Baseline::Constant(b) => *b,
            Baseline::Trace(t) => t.values()[..horizon].iter().sum::<f64>() / horizon as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Pricing period in hours.
    pub period_hours: f64,
    pub horizon: usize,
    pub supply: LinearSupply,
    pub demand: DemandSide,
    pub baseline: Baseline,
    pub controller: ControllerConfig,
    pub attack: AttackSpec,
    pub initial_price: f64,
    /// Seeds the choice of compromised consumers in a population that has no
    /// group assignment yet.
    pub seed: u64,
    pub feeder_rating: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        if !(self.period_hours.is_finite() && self.period_hours > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "period must be > 0 hours, got {}",
                self.period_hours
            )));
        }
        if !self.controller.bounds().contains(self.initial_price) {
            return Err(Error::InvalidConfig(format!(
                "initial price {} is outside [{}, {}]",
                self.initial_price,
                self.controller.bounds().min(),
                self.controller.bounds().max()
            )));
        }
        match &self.baseline {
            Baseline::Constant(b) if !(b.is_finite() && *b >= 0.0) => {
                return Err(Error::InvalidConfig(format!(
                    "baseline must be >= 0, got {b}"
                )));
            }
            Baseline::Trace(t) if t.len() < self.horizon => {
                return Err(Error::InvalidConfig(format!(
                    "baseline trace has {} samples, horizon needs {}",
                    t.len(),
                    self.horizon
                )));
            }
            Baseline::Trace(t) if (t.period_hours() - self.period_hours).abs() > 1e-9 => {
                return Err(Error::InvalidConfig(format!(
                    "baseline trace period {} h differs from pricing period {} h",
                    t.period_hours(),
                    self.period_hours
                )));
            }
            _ => {}
        }
        if let Some(r) = self.feeder_rating {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "feeder rating must be > 0, got {r}"
                )));
            }
        }
        if let DemandSide::Population(pop) = &self.demand {
            if pop.is_empty() {
                return Err(Error::InvalidConfig("population is empty".into()));
            }
        }
        Ok(())
    }

    /// Periods in one day.
    pub fn periods_per_day(&self) -> usize {
        libm::round(24.0 / self.period_hours) as usize
    }
}

/// One simulated period.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub k: usize,
    pub lambda: f64,
    /// Price seen by each attack group (empty without an attack).
    pub lambda_attacked: Vec<f64>,
    pub baseline: f64,
    pub demand_honest: f64,
    pub demand_compromised: f64,
    pub demand_total: f64,
    pub supply_scheduled: f64,
    pub error: f64,
    /// Marginal ratio at the operating point the controller uses with `e_k`.
    pub h: f64,
}

impl SimRecord {
    /// The price of the first attack group, or the honest price.
    pub fn first_attacked(&self) -> f64 {
        self.lambda_attacked.first().copied().unwrap_or(self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
    /// Period from which the attack was active, if it ever was.
    pub attack_start: Option<usize>,
    /// First period at which the convergence detector fired.
    pub converged_at: Option<usize>,
    /// First period at which the divergence detector fired.
    pub diverged_at: Option<usize>,
    /// `s(λ*)` at the clearing price for the mean baseline; scales the
    /// divergence threshold.
    pub reference_supply: f64,
    pub periods_per_day: usize,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_price(&self) -> Option<f64> {
        self.records.last().map(|r| r.lambda)
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.error)
    }
}

/// Runs the closed loop for `cfg.horizon` periods.
pub fn run(cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let mut demand = cfg.demand.clone();
    let fractions = cfg.attack.fractions();
    if let DemandSide::Population(pop) = &mut demand {
        let assigned = pop.consumers().iter().any(|c| c.group.is_some());
        if !cfg.attack.is_none() && !assigned {
            pop.assign_groups(&fractions, cfg.seed)?;
        }
    }
    let bounds = cfg.controller.bounds();
    let mean_b = cfg.baseline.mean(cfg.horizon);
    let lambda_star = clearing_price(&cfg.supply, &demand, mean_b, bounds.min(), bounds.max())?;
    let reference_supply = cfg.supply.supply(lambda_star)?;

    let mut start_k = match cfg.attack.start() {
        AttackStart::Period(k) => Some(k),
        AttackStart::AfterConvergence { .. } => None,
    };
    let mut conv = ConvergenceDetector::default();
    let mut div = DivergenceDetector::new(reference_supply);
    let mut converged_at = None;
    let mut diverged_at = None;

    let mut prices = Vec::with_capacity(cfg.horizon + 1);
    prices.push(cfg.initial_price);
    let mut records = Vec::with_capacity(cfg.horizon);
    for k in 0..cfg.horizon {
        if let (
            None,
            AttackStart::AfterConvergence {
                fallback: Some(f), ..
            },
        ) = (start_k, cfg.attack.start())
        {
            if k >= f {
                start_k = Some(f);
            }
        }
        let lambda = prices[k];
        let gate = if cfg.attack.is_none() {
            usize::MAX
        } else {
            start_k.unwrap_or(usize::MAX)
        };
        let attacked = if cfg.attack.is_none() {
            Vec::new()
        } else {
            apply_attack(&cfg.attack, &prices, k, gate).map_err(|e| e.at(k))?
        };
        let b = cfg.baseline.at(k);
        let parts = demand
            .breakdown(b, lambda, &attacked, &fractions)
            .map_err(|e| e.at(k))?;
        let s = cfg.supply.supply(lambda).map_err(|e| e.at(k))?;
        let e = s - parts.total;
        let lo = cfg.controller.operating_point(lambda);
        let h = marginal_ratio(&demand, &cfg.supply, lo).map_err(|e| e.at(k))?;
        records.push(SimRecord {
            k,
            lambda,
            lambda_attacked: attacked,
            baseline: b,
            demand_honest: parts.honest,
            demand_compromised: parts.compromised,
            demand_total: parts.total,
            supply_scheduled: s,
            error: e,
            h,
        });

        if conv.observe(e, s) && converged_at.is_none() {
            converged_at = Some(k);
            if let (None, AttackStart::AfterConvergence { margin, .. }) =
                (start_k, cfg.attack.start())
            {
                start_k = Some(k + 1 + margin);
            }
        }
        if div.observe(e, bounds.pinned(lambda)) && diverged_at.is_none() {
            diverged_at = Some(k);
        }

        let next = match cfg.controller.mode() {
            ControllerMode::DirectFeedback => {
                match direct_feedback_update(&cfg.supply, parts.total, &bounds) {
                    Ok(p) => p,
                    Err(Error::SupplyInverseDomain { .. }) => bounds.min(),
                    Err(err) => return Err(err.at(k)),
                }
            }
            _ => stabilizing_update(&cfg.controller, lambda, e, &demand, &cfg.supply)
                .map_err(|e| e.at(k))?,
        };
        prices.push(next);
    }
    let attack_start = if cfg.attack.is_none() {
        None
    } else {
        start_k.filter(|&s| s < cfg.horizon)
    };
    Ok(SimTrace {
        records,
        attack_start,
        converged_at,
        diverged_at,
        reference_supply,
        periods_per_day: cfg.periods_per_day(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::PriceBounds;
    use crate::models::calibrate_demand_scale;

    fn region(eta: f64, attack: AttackSpec, horizon: usize) -> SimConfig {
        let supply = LinearSupply::new(152.0, 4503.0).unwrap();
        let w = calibrate_demand_scale(&supply, 2000.0, 20.0, -0.8).unwrap();
        SimConfig {
            period_hours: 0.5,
            horizon,
            supply,
            demand: DemandSide::Aggregate(w),
            baseline: Baseline::Constant(2000.0),
            controller: ControllerConfig::adaptive(eta, PriceBounds::new(1.0, 200.0).unwrap())
                .unwrap(),
            attack,
            initial_price: 21.0,
            seed: 1,
            feeder_rating: None,
        }
    }

    #[test]
    fn benign_run_reaches_clearing_price() {
        let t = run(&region(0.5, AttackSpec::none(), 20)).unwrap();
        let e2 = t.records[2].error;
        assert!(e2.abs() < 1e-6 * t.records[2].supply_scheduled);
        assert!((t.final_price().unwrap() - 20.0).abs() < 1e-9);
        assert!((t.reference_supply - 7543.0).abs() < 1e-6);
        assert!(t.converged_at.is_some());
        assert_eq!(t.attack_start, None);
    }

    #[test]
    fn accounting_holds_per_row() {
        let attack = AttackSpec::scaling(0.6, 0.57, AttackStart::Period(3)).unwrap();
        let t = run(&region(0.8, attack, 50)).unwrap();
        for r in &t.records {
            assert_eq!(
                r.demand_total,
                r.baseline + r.demand_honest + r.demand_compromised
            );
            assert_eq!(r.error, r.supply_scheduled - r.demand_total);
            assert!((1.0..=200.0).contains(&r.lambda));
        }
        assert_eq!(t.attack_start, Some(3));
        assert_eq!(t.records[2].lambda_attacked[0], t.records[2].lambda);
        assert!((t.records[3].lambda_attacked[0] - 0.57 * t.records[3].lambda).abs() < 1e-12);
    }

    #[test]
    fn auto_launch_waits_for_convergence() {
        let attack = AttackSpec::delay(
            1.0,
            3,
            AttackStart::AfterConvergence {
                margin: 0,
                fallback: None,
            },
        )
        .unwrap();
        let t = run(&region(0.2, attack, 80)).unwrap();
        let c = t.converged_at.unwrap();
        assert_eq!(t.attack_start, Some(c + 1));
    }

    #[test]
    fn fallback_launch() {
        let attack = AttackSpec::delay(
            1.0,
            3,
            AttackStart::AfterConvergence {
                margin: 1000,
                fallback: Some(7),
            },
        )
        .unwrap();
        let t = run(&region(0.2, attack, 30)).unwrap();
        assert_eq!(t.attack_start, Some(7));
    }

    #[test]
    fn config_errors() {
        let mut cfg = region(0.5, AttackSpec::none(), 0);
        assert!(run(&cfg).is_err());
        cfg.horizon = 10;
        cfg.initial_price = 500.0;
        assert!(run(&cfg).is_err());
        cfg.initial_price = 21.0;
        cfg.baseline = Baseline::Trace(BaselineTrace::new(0.5, alloc::vec![1.0; 5]).unwrap());
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));
    }
}
