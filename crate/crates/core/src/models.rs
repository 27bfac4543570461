//! Demand and supply models, consumer populations and calibration.
//!
//! Prices are in $/MWh throughout. Quantities are in whatever unit the scenario
//! picks (MW for region-scale runs, kW for house-scale runs); the models never
//! convert between them.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_price, positive, Error, Result};

/// Price-responsive demand `w(λ)`.
pub trait DemandModel {
    /// Demand at `price`.
    fn demand(&self, price: f64) -> Result<f64>;
    /// Derivative `ẇ(λ)`; negative for every valid model.
    fn slope(&self, price: f64) -> Result<f64>;
}

/// Scheduled supply `s(λ)`.
pub trait SupplyModel {
    fn supply(&self, price: f64) -> Result<f64>;
    /// Derivative `ṡ(λ)`.
    fn slope(&self, price: f64) -> Result<f64>;
    /// The price at which the supplier would schedule `quantity`.
    fn inverse(&self, quantity: f64) -> Result<f64>;
}

/// Constant elasticity of own-price demand, `w(λ) = D·λ^ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CeoDemand {
    scale: f64,
    elasticity: f64,
}

impl CeoDemand {
    /// Requires `scale > 0` and `-1 < elasticity < 0`.
    pub fn new(scale: f64, elasticity: f64) -> Result<Self> {
        positive("D", scale)?;
        if !(elasticity > -1.0 && elasticity < 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: elasticity,
                reason: "must lie in (-1, 0)",
            });
        }
        Ok(Self { scale, elasticity })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn elasticity(&self) -> f64 {
        self.elasticity
    }

    /// The same elasticity with the scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.scale * factor, self.elasticity)
    }
}

impl DemandModel for CeoDemand {
    fn demand(&self, price: f64) -> Result<f64> {
        let price = check_price(price)?;
        Ok(self.scale * libm::pow(price, self.elasticity))
    }

    fn slope(&self, price: f64) -> Result<f64> {
        let price = check_price(price)?;
        Ok(self.scale * self.elasticity * libm::pow(price, self.elasticity - 1.0))
    }
}

/// Linear supply `s(λ) = pλ + q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSupply {
    slope: f64,
    intercept: f64,
}

impl LinearSupply {
    /// Requires `p > 0` and `q > 0`.
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        positive("p", slope)?;
        positive("q", intercept)?;
        Ok(Self { slope, intercept })
    }

    pub fn p(&self) -> f64 {
        self.slope
    }

    pub fn q(&self) -> f64 {
        self.intercept
    }

    /// Shrinks a region-wide supply curve down to a group of `houses` out of a
    /// region of `population` consumers, of which this group takes `share` of
    /// the generation: both parameters become `share · x / (population / houses)`.
    pub fn scaled_to(&self, houses: f64, share: f64, population: f64) -> Result<Self> {
        positive("houses", houses)?;
        positive("share", share)?;
        positive("population", population)?;
        let per_group = population / houses;
        Self::new(
            share * self.slope / per_group,
            share * self.intercept / per_group,
        )
    }
}

impl SupplyModel for LinearSupply {
    fn supply(&self, price: f64) -> Result<f64> {
        let price = check_price(price)?;
        Ok(self.slope * price + self.intercept)
    }

    fn slope(&self, price: f64) -> Result<f64> {
        check_price(price)?;
        Ok(self.slope)
    }

    fn inverse(&self, quantity: f64) -> Result<f64> {
        if !(quantity > self.intercept) {
            return Err(Error::SupplyInverseDomain {
                supply: quantity,
                intercept: self.intercept,
            });
        }
        Ok((quantity - self.intercept) / self.slope)
    }
}

/// Marginal demand-supply ratio `h = |ẇ(λ_o) / ṡ(λ_o)|`.
pub fn marginal_ratio<D, S>(demand: &D, supply: &S, lambda_o: f64) -> Result<f64>
where
    D: DemandModel + ?Sized,
    S: SupplyModel + ?Sized,
{
    let ds = supply.slope(lambda_o)?;
    if ds == 0.0 {
        return Err(Error::SingularSlope(lambda_o));
    }
    Ok((demand.slope(lambda_o)? / ds).abs())
}

/// Picks `D` so that `s(λ*) = b + D·λ*^ε`, making `λ*` the clearing price.
pub fn calibrate_demand_scale(
    supply: &LinearSupply,
    baseline: f64,
    lambda_star: f64,
    elasticity: f64,
) -> Result<CeoDemand> {
    check_price(lambda_star)?;
    if !(baseline.is_finite() && baseline >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: baseline,
            reason: "must be finite and >= 0",
        });
    }
    let scale = (supply.supply(lambda_star)? - baseline) / libm::pow(lambda_star, elasticity);
    if !(scale > 0.0) {
        return Err(Error::Calibration { baseline, scale });
    }
    CeoDemand::new(scale, elasticity)
}

/// Solves `s(λ) = b + w(λ)` on `[lo, hi]`.
///
/// `s − b − w` is strictly increasing for the models in this crate, so plain
/// bisection is used and runs until the bracket stops shrinking. If the root
/// lies outside the bracket the nearer end is returned.
pub fn clearing_price<D, S>(supply: &S, demand: &D, baseline: f64, lo: f64, hi: f64) -> Result<f64>
where
    D: DemandModel + ?Sized,
    S: SupplyModel + ?Sized,
{
    check_price(lo)?;
    check_price(hi)?;
    let gap = |l: f64| -> Result<f64> { Ok(supply.supply(l)? - baseline - demand.demand(l)?) };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    if gap(a)? >= 0.0 {
        return Ok(a);
    }
    if gap(b)? <= 0.0 {
        return Ok(b);
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Ok(mid);
        }
        if gap(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
}

/// Result of an ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyFit {
    pub supply: LinearSupply,
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
    pub points: usize,
}

/// Ordinary least-squares fit of `supply = p·price + q` to raw pairs.
pub fn fit_linear_supply(points: &[(f64, f64)]) -> Result<SupplyFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite value"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all prices are equal"));
    }
    let p = sxy / sxx;
    let q = my - p * mx;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (p * x + q);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(SupplyFit {
        supply: LinearSupply::new(p, q)?,
        r_squared,
        residual_rms: libm::sqrt(sse / n),
        points: points.len(),
    })
}

/// One consumer: its own CEO demand, the multiplier applied to the raw
/// baseline trace, and the attack group whose price it receives (if any).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consumer {
    pub demand: CeoDemand,
    pub baseline_scale: f64,
    pub group: Option<usize>,
}

/// Demand split by who saw which price.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DemandBreakdown {
    pub baseline: f64,
    pub honest: f64,
    pub compromised: f64,
    pub total: f64,
}

/// A finite set of consumers, some of them assigned to attack groups.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConsumerPopulation {
    consumers: Vec<Consumer>,
}

/// Normal distributions for per-consumer parameters, truncated to keep each
/// draw inside the model's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationDistribution {
    pub scale_mean: f64,
    pub scale_sd: f64,
    pub scale_min: f64,
    pub elasticity_mean: f64,
    pub elasticity_sd: f64,
    pub elasticity_min: f64,
    pub elasticity_max: f64,
}

impl PopulationDistribution {
    /// House-scale defaults in kW: `D ~ N(7, 3.5²)` truncated at 0.5 and
    /// `ε ~ N(-0.8, 0.1²)` truncated to (-0.99, -0.01).
    pub const HOUSES_KW: Self = Self {
        scale_mean: 7.0,
        scale_sd: 3.5,
        scale_min: 0.5,
        elasticity_mean: -0.8,
        elasticity_sd: 0.1,
        elasticity_min: -0.99,
        elasticity_max: -0.01,
    };
}

fn truncated<R: Rng + ?Sized>(rng: &mut R, dist: &Normal<f64>, lo: f64, hi: f64) -> f64 {
    // Rejection is fine here: both default truncations keep well over 90% of the mass.
    loop {
        let x = dist.sample(rng);
        if x >= lo && x <= hi {
            return x;
        }
    }
}

impl ConsumerPopulation {
    pub fn new(consumers: Vec<Consumer>) -> Result<Self> {
        for c in &consumers {
            if !(c.baseline_scale.is_finite() && c.baseline_scale >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "baseline_scale",
                    value: c.baseline_scale,
                    reason: "must be finite and >= 0",
                });
            }
        }
        Ok(Self { consumers })
    }

    /// `n` identical consumers, none compromised.
    pub fn homogeneous(n: usize, demand: CeoDemand, baseline_scale: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|_| Consumer {
                    demand,
                    baseline_scale,
                    group: None,
                })
                .collect(),
        )
    }

    /// Draws `n` consumers from `dist` with a seeded generator.
    pub fn sample(
        n: usize,
        dist: &PopulationDistribution,
        baseline_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        let sd = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "standard deviation must be finite and >= 0",
                })
            }
        };
        let d = Normal::new(dist.scale_mean, sd("scale_sd", dist.scale_sd)?).map_err(|_| {
            Error::InvalidParameter {
                name: "scale_mean",
                value: dist.scale_mean,
                reason: "invalid normal distribution",
            }
        })?;
        let e = Normal::new(
            dist.elasticity_mean,
            sd("elasticity_sd", dist.elasticity_sd)?,
        )
        .map_err(|_| Error::InvalidParameter {
            name: "elasticity_mean",
            value: dist.elasticity_mean,
            reason: "invalid normal distribution",
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut consumers = Vec::with_capacity(n);
        for _ in 0..n {
            let scale = truncated(
                &mut rng,
                &d,
                dist.scale_min.max(f64::MIN_POSITIVE),
                f64::INFINITY,
            );
            let eps = truncated(&mut rng, &e, dist.elasticity_min, dist.elasticity_max);
            consumers.push(Consumer {
                demand: CeoDemand::new(scale, eps)?,
                baseline_scale,
                group: None,
            });
        }
        Self::new(consumers)
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    pub fn len(&self) -> usize {
        self.consumers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.consumers.is_empty()
    }

    /// Clears all group memberships.
    pub fn clear_groups(&mut self) {
        for c in &mut self.consumers {
            c.group = None;
        }
    }

    /// Assigns disjoint, uniformly random subsets of sizes `round(f·n)` to
    /// groups `0, 1, …` in the order of `fractions`.
    pub fn assign_groups(&mut self, fractions: &[f64], seed: u64) -> Result<()> {
        let total: f64 = fractions.iter().sum();
        if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) || total > 1.0 + 1e-12 {
            return Err(Error::InvalidAttack(alloc::format!(
                "group fractions {fractions:?} must be positive with sum <= 1"
            )));
        }
        let n = self.consumers.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.clear_groups();
        let mut next = 0;
        for (g, f) in fractions.iter().enumerate() {
            let size = libm::round(f * n as f64) as usize;
            let end = (next + size).min(n);
            for &i in &order[next..end] {
                self.consumers[i].group = Some(g);
            }
            next = end;
        }
        Ok(())
    }

    /// Fraction of consumers (by head count) in any attack group.
    pub fn compromised_share(&self) -> f64 {
        if self.consumers.is_empty() {
            return 0.0;
        }
        let k = self.consumers.iter().filter(|c| c.group.is_some()).count();
        k as f64 / self.consumers.len() as f64
    }

    /// Total baseline given one raw trace value: `raw · Σ baseline_scale_i`.
    pub fn baseline_load(&self, raw: f64) -> f64 {
        raw * self.consumers.iter().map(|c| c.baseline_scale).sum::<f64>()
    }

    /// Total price-responsive demand at a single price.
    pub fn price_demand(&self, price: f64) -> Result<f64> {
        let mut sum = 0.0;
        for c in &self.consumers {
            sum += c.demand.demand(price)?;
        }
        Ok(sum)
    }

    /// Aggregate demand for consumers receiving the honest price `lambda`,
    /// except members of group `g`, who receive `attacked[g]`. Groups with no
    /// entry in `attacked` get the honest price.
    pub fn aggregate_demand(
        &self,
        baseline: f64,
        lambda: f64,
        attacked: &[f64],
    ) -> Result<DemandBreakdown> {
        check_price(lambda)?;
        let mut honest = 0.0;
        let mut compromised = 0.0;
        for c in &self.consumers {
            match c.group.and_then(|g| attacked.get(g)) {
                Some(&price) => compromised += c.demand.demand(price)?,
                None => honest += c.demand.demand(lambda)?,
            }
        }
        Ok(DemandBreakdown {
            baseline,
            honest,
            compromised,
            total: baseline + honest + compromised,
        })
    }

    /// `ρ = Σ_{compromised} w_j(λ') / Σ_all w_j(λ')`.
    pub fn rho_of(&self, attacked_price: f64) -> Result<f64> {
        let mut part = 0.0;
        let mut all = 0.0;
        for c in &self.consumers {
            let w = c.demand.demand(attacked_price)?;
            all += w;
            if c.group.is_some() {
                part += w;
            }
        }
        if all == 0.0 {
            return Err(Error::UndefinedRatio);
        }
        Ok(part / all)
    }
}

impl DemandModel for ConsumerPopulation {
    fn demand(&self, price: f64) -> Result<f64> {
        self.price_demand(price)
    }

    fn slope(&self, price: f64) -> Result<f64> {
        let mut sum = 0.0;
        for c in &self.consumers {
            sum += c.demand.slope(price)?;
        }
        Ok(sum)
    }
}

/// Total baseline demand sampled every `period_hours`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTrace {
    period_hours: f64,
    values: Vec<f64>,
}

impl BaselineTrace {
    pub fn new(period_hours: f64, values: Vec<f64>) -> Result<Self> {
        positive("T", period_hours)?;
        if let Some(&v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "baseline",
                value: v,
                reason: "trace values must be finite and >= 0",
            });
        }
        Ok(Self {
            period_hours,
            values,
        })
    }

    pub fn period_hours(&self) -> f64 {
        self.period_hours
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.period_hours,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// `(min, max)` of the samples, or `None` for an empty trace.
    pub fn range(&self) -> Option<(f64, f64)> {
        let first = *self.values.first()?;
        Some(
            self.values
                .iter()
                .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn region() -> (LinearSupply, CeoDemand) {
        let s = LinearSupply::new(152.0, 4503.0).unwrap();
        let d = calibrate_demand_scale(&s, 2000.0, 20.0, -0.8).unwrap();
        (s, d)
    }

    #[test]
    fn calibrated_region_model() {
        let (s, d) = region();
        assert!((d.scale() - 60893.2).abs() < 0.5);
        assert_relative_eq!(d.demand(20.0).unwrap(), 5543.0, max_relative = 1e-12);
        assert_relative_eq!(s.supply(20.0).unwrap(), 7543.0);
        assert_relative_eq!(s.inverse(7543.0).unwrap(), 20.0);
        assert_relative_eq!(d.slope(20.0).unwrap(), -221.72, max_relative = 1e-12);
        assert_relative_eq!(
            marginal_ratio(&d, &s, 20.0).unwrap(),
            221.72 / 152.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn demand_at_unit_price_is_scale() {
        let d = CeoDemand::new(1234.5, -0.37).unwrap();
        assert_eq!(d.demand(1.0).unwrap(), 1234.5);
        assert_relative_eq!(d.slope(1.0).unwrap(), 1234.5 * -0.37);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CeoDemand::new(0.0, -0.5).is_err());
        assert!(CeoDemand::new(1.0, -1.0).is_err());
        assert!(CeoDemand::new(1.0, 0.0).is_err());
        assert!(LinearSupply::new(-1.0, 1.0).is_err());
        let (s, d) = region();
        assert_eq!(d.demand(0.0), Err(Error::PriceDomain(0.0)));
        assert!(s.supply(-3.0).is_err());
        assert!(matches!(
            s.inverse(4503.0),
            Err(Error::SupplyInverseDomain { .. })
        ));
    }

    #[test]
    fn calibration_edge_cases() {
        let s = LinearSupply::new(152.0, 4503.0).unwrap();
        let d = calibrate_demand_scale(&s, 0.0, 1.0, -0.3).unwrap();
        assert_eq!(d.scale(), 4655.0);
        assert!(matches!(
            calibrate_demand_scale(&s, 9000.0, 20.0, -0.8),
            Err(Error::Calibration { .. })
        ));
    }

    #[test]
    fn clearing_price_recovers_calibration() {
        let (s, d) = region();
        let l = clearing_price(&s, &d, 2000.0, 1.0, 100.0).unwrap();
        assert!((l - 20.0).abs() < 1e-9 * 20.0);
    }

    #[test]
    fn house_scale_supply() {
        let s = LinearSupply::new(152.0, 4503.0)
            .unwrap()
            .scaled_to(1405.0, 0.57, 2_800_000.0)
            .unwrap();
        assert_relative_eq!(s.p(), 0.57 * 152.0 * 1405.0 / 2.8e6, max_relative = 1e-12);
        assert_relative_eq!(s.q(), 0.57 * 4503.0 * 1405.0 / 2.8e6, max_relative = 1e-12);
        let direct = LinearSupply::new(0.043638, 1.287).unwrap();
        assert_relative_eq!(direct.supply(15.0).unwrap(), 1.94157, max_relative = 1e-9);
    }

    #[test]
    fn two_point_fit() {
        let fit = fit_linear_supply(&[(10.0, 6023.0), (20.0, 7543.0)]).unwrap();
        assert_relative_eq!(fit.supply.p(), 152.0, max_relative = 1e-12);
        assert_relative_eq!(fit.supply.q(), 4503.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0);
        assert!(fit_linear_supply(&[(5.0, 1.0), (5.0, 2.0)]).is_err());
        assert!(fit_linear_supply(&[(5.0, 1.0)]).is_err());
    }

    #[test]
    fn aggregation_with_half_compromised() {
        // w_j(20) = 1 with ε = -0.8 means D = 20^0.8.
        let w = CeoDemand::new(libm::pow(20.0, 0.8), -0.8).unwrap();
        let mut pop = ConsumerPopulation::homogeneous(10, w, 0.0).unwrap();
        pop.assign_groups(&[0.5], 7).unwrap();
        let out = pop.aggregate_demand(100.0, 20.0, &[10.0]).unwrap();
        let w10 = libm::pow(2.0, 0.8);
        assert_relative_eq!(out.compromised, 5.0 * w10, max_relative = 1e-12);
        assert_relative_eq!(out.honest, 5.0, max_relative = 1e-12);
        assert_relative_eq!(out.total, 100.0 + 5.0 * w10 + 5.0, max_relative = 1e-12);
        assert_relative_eq!(pop.rho_of(10.0).unwrap(), 0.5);
        assert!((w10 - 1.741).abs() < 1e-3);
    }

    #[test]
    fn attack_identity_in_aggregation() {
        let w = CeoDemand::new(3.0, -0.5).unwrap();
        let mut pop = ConsumerPopulation::homogeneous(8, w, 1.0).unwrap();
        let plain = pop.aggregate_demand(2.0, 9.0, &[]).unwrap();
        assert_relative_eq!(
            plain.total,
            2.0 + 8.0 * w.demand(9.0).unwrap(),
            max_relative = 1e-12
        );
        pop.assign_groups(&[0.25], 1).unwrap();
        let same = pop.aggregate_demand(2.0, 9.0, &[9.0]).unwrap();
        assert_relative_eq!(same.total, plain.total, max_relative = 1e-12);
        assert_eq!(pop.baseline_load(0.4), 3.2);
    }

    #[test]
    fn group_assignment_is_disjoint_and_sized() {
        let w = CeoDemand::new(3.0, -0.5).unwrap();
        let mut pop = ConsumerPopulation::homogeneous(1405, w, 1.0).unwrap();
        pop.assign_groups(&[0.3, 0.2], 11).unwrap();
        let g0 = pop
            .consumers()
            .iter()
            .filter(|c| c.group == Some(0))
            .count();
        let g1 = pop
            .consumers()
            .iter()
            .filter(|c| c.group == Some(1))
            .count();
        assert_eq!(g0, 422);
        assert_eq!(g1, 281);
        assert!(pop.assign_groups(&[0.7, 0.4], 1).is_err());
    }

    #[test]
    fn sampled_population_respects_truncation() {
        let pop =
            ConsumerPopulation::sample(2000, &PopulationDistribution::HOUSES_KW, 1.0, 5).unwrap();
        for c in pop.consumers() {
            assert!(c.demand.scale() >= 0.5);
            assert!(c.demand.elasticity() > -0.99 && c.demand.elasticity() < -0.01);
        }
        let again =
            ConsumerPopulation::sample(2000, &PopulationDistribution::HOUSES_KW, 1.0, 5).unwrap();
        assert_eq!(pop, again);
    }

    #[test]
    fn trace_validation_and_range() {
        assert!(BaselineTrace::new(0.5, alloc::vec![1.0, -1.0]).is_err());
        let t = BaselineTrace::new(0.5, alloc::vec![0.3, 0.1, 0.2]).unwrap();
        assert_eq!(t.range(), Some((0.1, 0.3)));
        assert_eq!(t.scaled(2.0).unwrap().values(), &[0.6, 0.2, 0.4]);
    }
}
