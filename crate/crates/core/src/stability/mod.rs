//! Stability of the attacked closed loop.
//!
//! The loop is linearised around an operating point; `h` is the marginal
//! demand-supply ratio there and `η` the controller gain. For each attack
//! family the characteristic polynomial is built in [`CharPoly`] and its
//! roots are located with the [`jury`] test, with [`roots_in_unit_circle`]
//! as an independent numeric oracle.

mod charpoly;
mod jury;
mod roots;
pub mod symbolic;

use alloc::format;
use alloc::vec::Vec;

pub use charpoly::CharPoly;
pub use jury::{jury, jury_stable, JuryVerdict, JURY_TOLERANCE};
pub use roots::{roots, roots_in_unit_circle, RootReport, ROOT_TOLERANCE};

use crate::error::{Error, Result};

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "must lie in (0, 1]",
        })
    }
}

fn check_gamma_mu(gamma_mu: f64) -> Result<()> {
    if gamma_mu.is_finite() && gamma_mu > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gamma_mu",
            value: gamma_mu,
            reason: "must be finite and > 0",
        })
    }
}

/// Upper gain bound under a scaling attack at one operating point,
/// `η̄ = (h+1) / (h + 1 + ρh(γμ − 1))`. The loop is stable iff
/// `η < min(1, η̄)`.
pub fn scaling_eta_bar(h: f64, rho: f64, gamma_mu: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be finite and > 0",
        });
    }
    check_rho(rho)?;
    check_gamma_mu(gamma_mu)?;
    let den = h + 1.0 + rho * h * (gamma_mu - 1.0);
    if !(den > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma_mu",
            value: gamma_mu,
            reason: "boundary denominator is not positive",
        });
    }
    Ok((h + 1.0) / den)
}

/// Gain bound valid for every `h` under a scaling attack: 1 when `γμ ≤ 1`,
/// otherwise `1 / (1 + ρ(γμ − 1))`.
pub fn scaling_ros_limit(rho: f64, gamma_mu: f64) -> Result<f64> {
    check_rho(rho)?;
    check_gamma_mu(gamma_mu)?;
    if gamma_mu <= 1.0 {
        Ok(1.0)
    } else {
        Ok(1.0 / (1.0 + rho * (gamma_mu - 1.0)))
    }
}

/// The `h` at which `η̄(h) = eta` for a scaling attack, or `None` if the
/// gain is stable for every `h` (`η ≤` the limit).
pub fn scaling_critical_h(eta: f64, rho: f64, gamma_mu: f64) -> Result<Option<f64>> {
    check_rho(rho)?;
    check_gamma_mu(gamma_mu)?;
    let den = eta * rho * (gamma_mu - 1.0) - (1.0 - eta);
    if den <= 0.0 {
        return Ok(None);
    }
    Ok(Some((1.0 - eta) / den))
}

/// An attack family whose closed-loop polynomial depends on `(h, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackFamily {
    Scaling { rho: f64, gamma_mu: f64 },
    Delay { rho: f64, tau: usize },
    ScaledDelay { rho: f64, tau: usize, gamma_mu: f64 },
}

impl AttackFamily {
    pub fn char_poly(&self, h: f64, eta: f64) -> Result<CharPoly> {
        match *self {
            AttackFamily::Scaling { rho, gamma_mu } => CharPoly::scaling(h, eta, rho, gamma_mu),
            AttackFamily::Delay { rho, tau } => CharPoly::delay(h, eta, rho, tau),
            AttackFamily::ScaledDelay { rho, tau, gamma_mu } => {
                CharPoly::scaled_delay(h, eta, rho, tau, gamma_mu)
            }
        }
    }

    /// Jury verdict at `(h, η)`, with marginal cases counted as unstable.
    pub fn stable_at(&self, h: f64, eta: f64) -> Result<bool> {
        Ok(jury_stable(&self.char_poly(h, eta)?))
    }

    pub fn rho(&self) -> f64 {
        match *self {
            AttackFamily::Scaling { rho, .. }
            | AttackFamily::Delay { rho, .. }
            | AttackFamily::ScaledDelay { rho, .. } => rho,
        }
    }

    /// Large-`h` bound where a closed form or exact reduction exists.
    pub fn limit(&self) -> Option<f64> {
        match *self {
            AttackFamily::Scaling { rho, gamma_mu } => scaling_ros_limit(rho, gamma_mu).ok(),
            AttackFamily::Delay { rho, tau } => delay_ros_limit(rho, tau).ok(),
            AttackFamily::ScaledDelay { .. } => None,
        }
    }
}

/// Number of gain values probed before bisecting.
pub const ETA_SCAN_POINTS: usize = 200;
/// Bisection width for `η̄`.
pub const ETA_TOLERANCE: f64 = 1e-5;

/// The set of stable gains at one `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaBar {
    /// Stable exactly for `η ∈ (0, value)`.
    Single(f64),
    /// The scan saw stability switch more than once; stable sub-intervals,
    /// each end resolved by bisection.
    Intervals(Vec<(f64, f64)>),
}

impl EtaBar {
    /// Upper end of the stable interval that starts at the origin (0 if
    /// none does).
    pub fn value(&self) -> f64 {
        match self {
            EtaBar::Single(v) => *v,
            EtaBar::Intervals(iv) => iv
                .first()
                .filter(|(lo, _)| *lo <= 1.0 / (ETA_SCAN_POINTS + 1) as f64)
                .map_or(0.0, |&(_, hi)| hi),
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, EtaBar::Single(_))
    }
}

/// Bisects for the switch between `lo` (stability `s_lo`) and `hi`; returns
/// the end of the bracket on the stable side.
fn bisect_eta(
    family: &AttackFamily,
    h: f64,
    mut lo: f64,
    mut hi: f64,
    s_lo: bool,
    tol: f64,
) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if family.stable_at(h, mid)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if s_lo { lo } else { hi })
}

/// `η̄(h) = sup{η ∈ (0,1) : stable}` by a 200-point scan then bisection to
/// `tol`. The stable-side end of the final bracket is reported, so the value
/// never overstates the stable range by more than rounding.
pub fn eta_bar_at(family: &AttackFamily, h: f64, tol: f64) -> Result<EtaBar> {
    let n = ETA_SCAN_POINTS;
    let grid: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let flags = grid
        .iter()
        .map(|&eta| family.stable_at(h, eta))
        .collect::<Result<Vec<bool>>>()?;
    let switches = flags.windows(2).filter(|w| w[0] != w[1]).count();
    if switches == 0 && flags[0] {
        return Ok(EtaBar::Single(1.0));
    }
    if switches == 0 {
        // Unstable across the grid: the bound, if any, is below the first point.
        return Ok(EtaBar::Single(bisect_eta(
            family, h, 0.0, grid[0], true, tol,
        )?));
    }
    if switches == 1 && flags[0] {
        let i = flags.iter().position(|f| !f).unwrap_or(n);
        return Ok(EtaBar::Single(bisect_eta(
            family,
            h,
            grid[i - 1],
            grid[i],
            true,
            tol,
        )?));
    }
    let mut intervals = Vec::new();
    let mut start = if flags[0] { Some(0.0) } else { None };
    for i in 1..n {
        if flags[i] == flags[i - 1] {
            continue;
        }
        let edge = bisect_eta(family, h, grid[i - 1], grid[i], flags[i - 1], tol)?;
        match start.take() {
            Some(s) => intervals.push((s, edge)),
            None => start = Some(edge),
        }
    }
    if let Some(s) = start {
        intervals.push((s, 1.0));
    }
    Ok(EtaBar::Intervals(intervals))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub h: f64,
    pub eta_bar: f64,
    /// False when the scan found several stable intervals; `eta_bar` is then
    /// the end of the one starting at the origin.
    pub single_crossing: bool,
}

/// Stability boundary `η̄(h)` over a grid of `h` values.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBoundary {
    pub family: AttackFamily,
    pub samples: Vec<BoundarySample>,
    /// Intervals reported for samples that were not single-crossing.
    pub intervals: Vec<(f64, Vec<(f64, f64)>)>,
    /// Whether the samples never increase with `h` (within `tol`).
    pub non_increasing: bool,
    pub limit: Option<f64>,
}

/// `η̄(h)` at each point of an ascending positive `h_grid`.
pub fn boundary_curve(
    family: &AttackFamily,
    h_grid: &[f64],
    tol: f64,
) -> Result<StabilityBoundary> {
    if h_grid.is_empty() {
        return Err(Error::InvalidConfig("empty h grid".into()));
    }
    if h_grid.iter().any(|h| !(h.is_finite() && *h > 0.0))
        || h_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidConfig(
            "h grid must be positive and strictly ascending".into(),
        ));
    }
    let mut samples = Vec::with_capacity(h_grid.len());
    let mut intervals = Vec::new();
    for &h in h_grid {
        let eb = eta_bar_at(family, h, tol)?;
        if let EtaBar::Intervals(iv) = &eb {
            intervals.push((h, iv.clone()));
        }
        samples.push(BoundarySample {
            h,
            eta_bar: eb.value(),
            single_crossing: eb.is_single(),
        });
    }
    let non_increasing = samples
        .windows(2)
        .all(|w| w[1].eta_bar <= w[0].eta_bar + tol);
    Ok(StabilityBoundary {
        family: *family,
        samples,
        intervals,
        non_increasing,
        limit: family.limit(),
    })
}

/// The `h` in `[h_lo, h_hi]` where stability at gain `eta` switches, by
/// bisection to `tol`. The two ends must disagree.
pub fn critical_h(family: &AttackFamily, eta: f64, h_lo: f64, h_hi: f64, tol: f64) -> Result<f64> {
    let s_lo = family.stable_at(h_lo, eta)?;
    let s_hi = family.stable_at(h_hi, eta)?;
    if s_lo == s_hi {
        return Err(Error::InvalidConfig(format!(
            "stability does not change between h = {h_lo} and h = {h_hi} at eta = {eta}"
        )));
    }
    let (mut lo, mut hi) = (h_lo, h_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if family.stable_at(mid, eta)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Large-`h` gain bound under a delay attack.
///
/// `ρ ≤ 1/2` is stable for every gain and returns 1. `τ = 1` gives
/// `1/(2ρ)`. Larger delays use the exact reduction in [`symbolic`]; delays
/// above [`symbolic::MAX_SYMBOLIC_TAU`] are rejected.
pub fn delay_ros_limit(rho: f64, tau: usize) -> Result<f64> {
    check_rho(rho)?;
    if tau == 0 {
        return Err(Error::InvalidAttack("delay tau must be >= 1".into()));
    }
    if rho <= 0.5 {
        return Ok(1.0);
    }
    if tau == 1 {
        return Ok(1.0 / (2.0 * rho));
    }
    symbolic::delay_limit_symbolic(rho, tau)
}

/// `η̄` from the Jury test at a very large `h`, used to cross-check limits.
pub const LIMIT_PROBE_H: f64 = 1e10;

/// Checks `η̄(h | ρ, τ+1) ≤ η̄(h | ρ, τ) + 1e-5` at every grid point.
pub fn ros_nesting_check(rho: f64, tau: usize, h_grid: &[f64]) -> Result<bool> {
    for &h in h_grid {
        let a = eta_bar_at(&AttackFamily::Delay { rho, tau }, h, ETA_TOLERANCE)?.value();
        let b = eta_bar_at(&AttackFamily::Delay { rho, tau: tau + 1 }, h, ETA_TOLERANCE)?.value();
        if b > a + 1e-5 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coefficients `(u1, u2, u3)` of the delay polynomial
/// `u1 z^{τ+1} + u2 z^τ + u3`.
pub fn delay_coefficients(h: f64, eta: f64, rho: f64) -> (f64, f64, f64) {
    (
        h + 1.0,
        2.0 * eta + 2.0 * eta * (1.0 - rho) * h - h - 1.0,
        2.0 * eta * rho * h,
    )
}

/// `g(A) = u1²A^{2τ+2} + 2u1u2·cosθ·A^{2τ+1} + u2²A^{2τ} − u3²`: the squared
/// modulus of `u1 z^{τ+1} + u2 z^τ` minus `u3²` at `z = A e^{iθ}`.
pub fn root_modulus_gap(u: (f64, f64, f64), tau: usize, theta: f64, a: f64) -> f64 {
    let (u1, u2, u3) = u;
    let t = tau as i32;
    u1 * u1 * libm::pow(a, (2 * t + 2) as f64)
        + 2.0 * u1 * u2 * libm::cos(theta) * libm::pow(a, (2 * t + 1) as f64)
        + u2 * u2 * libm::pow(a, (2 * t) as f64)
        - u3 * u3
}

/// `g'(A) / A^{2τ}`; positive on `A ≥ 1` exactly when `g` is increasing there.
pub fn root_modulus_gap_slope(u: (f64, f64, f64), tau: usize, theta: f64, a: f64) -> f64 {
    let (u1, u2, _) = u;
    let t = tau as f64;
    u1 * u1 * (2.0 * t + 2.0) * a
        + 2.0 * u1 * u2 * (2.0 * t + 1.0) * libm::cos(theta)
        + 2.0 * t * u2 * u2 / a
}

/// Whether `g` is strictly increasing on `[1, ∞)`.
///
/// `g'(A)/A^{2τ}` is convex in `A > 0` with its minimum at
/// `A* = |u2/u1|·√(τ/(τ+1))`, so it suffices to check it at `max(1, A*)`.
pub fn root_modulus_gap_increasing(u: (f64, f64, f64), tau: usize, theta: f64) -> bool {
    let (u1, u2, _) = u;
    let t = tau as f64;
    let a_star = (u2 / u1).abs() * libm::sqrt(t / (t + 1.0));
    root_modulus_gap_slope(u, tau, theta, a_star.max(1.0)) > 0.0
}
