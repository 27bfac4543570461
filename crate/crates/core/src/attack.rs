//! Integrity attacks on the price stream delivered to consumers.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// How a compromised meter rewrites the true price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceTransform {
    /// `λ'_k = γ·λ_k`.
    Scaling { gamma: f64 },
    /// `λ'_k = λ_{k−τ}`.
    Delay { tau: usize },
    /// `λ'_k = γ·λ_{k−τ}`.
    ScaledDelay { gamma: f64, tau: usize },
}

impl PriceTransform {
    pub fn validate(&self) -> Result<()> {
        let (gamma, tau) = match *self {
            PriceTransform::Scaling { gamma } => (gamma, None),
            PriceTransform::Delay { tau } => (1.0, Some(tau)),
            PriceTransform::ScaledDelay { gamma, tau } => (gamma, Some(tau)),
        };
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidAttack(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if tau == Some(0) {
            return Err(Error::InvalidAttack("delay tau must be >= 1".into()));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            PriceTransform::Scaling { gamma } | PriceTransform::ScaledDelay { gamma, .. } => gamma,
            PriceTransform::Delay { .. } => 1.0,
        }
    }

    pub fn tau(&self) -> usize {
        match *self {
            PriceTransform::Scaling { .. } => 0,
            PriceTransform::Delay { tau } | PriceTransform::ScaledDelay { tau, .. } => tau,
        }
    }

    /// Rewrites the price of period `k` given the true prices `history[0..=k]`.
    ///
    /// Delayed meters replay genuinely received prices; before `τ` periods
    /// have elapsed since period 0 they replay `λ_0`.
    pub fn apply(&self, history: &[f64], k: usize) -> Result<f64> {
        if k >= history.len() {
            return Err(Error::InvalidAttack(format!(
                "price history has {} entries, period {k} requested",
                history.len()
            )));
        }
        let lagged = history[k.saturating_sub(self.tau())];
        Ok(self.gamma() * lagged)
    }
}

/// A disjoint share of consumers receiving one rewritten price stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackGroup {
    pub fraction: f64,
    pub transform: PriceTransform,
}

/// When the attack goes live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackStart {
    /// At a fixed period index.
    Period(usize),
    /// `margin` periods after the honest loop is first detected as converged,
    /// or at `fallback` if that comes first.
    AfterConvergence {
        margin: usize,
        fallback: Option<usize>,
    },
}

/// Zero or more attack groups with a common launch time.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    groups: Vec<AttackGroup>,
    start: AttackStart,
}

impl AttackSpec {
    pub fn new(groups: Vec<AttackGroup>, start: AttackStart) -> Result<Self> {
        let mut total = 0.0;
        for g in &groups {
            if !(g.fraction > 0.0 && g.fraction <= 1.0) {
                return Err(Error::InvalidAttack(format!(
                    "group fraction must lie in (0, 1], got {}",
                    g.fraction
                )));
            }
            g.transform.validate()?;
            total += g.fraction;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidAttack(format!(
                "group fractions sum to {total}, more than 1"
            )));
        }
        Ok(Self { groups, start })
    }

    pub fn none() -> Self {
        Self {
            groups: Vec::new(),
            start: AttackStart::Period(0),
        }
    }

    fn single(rho: f64, transform: PriceTransform, start: AttackStart) -> Result<Self> {
        Self::new(
            alloc::vec![AttackGroup {
                fraction: rho,
                transform
            }],
            start,
        )
    }

    pub fn scaling(rho: f64, gamma: f64, start: AttackStart) -> Result<Self> {
        Self::single(rho, PriceTransform::Scaling { gamma }, start)
    }

    pub fn delay(rho: f64, tau: usize, start: AttackStart) -> Result<Self> {
        Self::single(rho, PriceTransform::Delay { tau }, start)
    }

    pub fn scaled_delay(rho: f64, gamma: f64, tau: usize, start: AttackStart) -> Result<Self> {
        Self::single(rho, PriceTransform::ScaledDelay { gamma, tau }, start)
    }

    pub fn groups(&self) -> &[AttackGroup] {
        &self.groups
    }

    pub fn start(&self) -> AttackStart {
        self.start
    }

    pub fn with_start(mut self, start: AttackStart) -> Self {
        self.start = start;
        self
    }

    pub fn is_none(&self) -> bool {
        self.groups.is_empty()
    }

    /// Total compromised fraction `Σ ρ_g`.
    pub fn rho(&self) -> f64 {
        self.groups.iter().map(|g| g.fraction).sum()
    }

    /// Group fractions, in group order.
    pub fn fractions(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.fraction).collect()
    }
}

/// One compromised price per group for period `k`. Before `start_k` every
/// group sees the true price.
pub fn apply_attack(
    spec: &AttackSpec,
    history: &[f64],
    k: usize,
    start_k: usize,
) -> Result<Vec<f64>> {
    let honest = *history.get(k).ok_or_else(|| {
        Error::InvalidAttack(format!(
            "price history has {} entries, period {k} requested",
            history.len()
        ))
    })?;
    spec.groups
        .iter()
        .map(|g| {
            if k < start_k {
                Ok(honest)
            } else {
                g.transform.apply(history, k)
            }
        })
        .collect()
}

/// `μ(γ) = γ^{ε−1}`, the factor with `ẇ(γλ) = μ·ẇ(λ)` for a CEO model.
pub fn mu_ceo(gamma: f64, elasticity: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidAttack(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    if !(elasticity > -1.0 && elasticity < 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: elasticity,
            reason: "must lie in (-1, 0)",
        });
    }
    Ok(libm::pow(gamma, elasticity - 1.0))
}
