//! Price-setting laws used by the system operator.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::{DemandModel, SupplyModel};

/// Closed price interval `[min, max]` with `0 < min < max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBounds {
    min: f64,
    max: f64,
}

impl PriceBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0 && min < max && max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda_min",
                value: min,
                reason: "price bounds need 0 < lambda_min < lambda_max < inf",
            });
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn clamp(&self, price: f64) -> f64 {
        price.clamp(self.min, self.max)
    }

    pub fn contains(&self, price: f64) -> bool {
        price >= self.min && price <= self.max
    }

    /// True when `price` sits on either bound.
    pub fn pinned(&self, price: f64) -> bool {
        price <= self.min || price >= self.max
    }
}

/// Where the controller linearises the models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerMode {
    /// A fixed operating point `λ_o`.
    Fixed { lambda_o: f64 },
    /// `λ_o = λ_{k-1}`.
    Adaptive,
    /// `λ_k = s⁻¹(d_{k-1})`, no gain at all.
    DirectFeedback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    eta: f64,
    mode: ControllerMode,
    bounds: PriceBounds,
    slope_error: f64,
}

impl ControllerConfig {
    /// `slope_error` is the relative error `E_w` of the demand-slope estimate,
    /// applied as `ẇ̃ = (1 − E_w)·ẇ`; it must be below 1.
    pub fn new(
        eta: f64,
        mode: ControllerMode,
        bounds: PriceBounds,
        slope_error: f64,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "gain must lie in (0, 1)",
            });
        }
        if !(slope_error < 1.0) || !slope_error.is_finite() {
            return Err(Error::InvalidParameter {
                name: "w_slope_error",
                value: slope_error,
                reason: "must be finite and < 1",
            });
        }
        if let ControllerMode::Fixed { lambda_o } = mode {
            if !bounds.contains(lambda_o) {
                return Err(Error::InvalidParameter {
                    name: "lambda_o",
                    value: lambda_o,
                    reason: "operating point must lie within the price bounds",
                });
            }
        }
        Ok(Self {
            eta,
            mode,
            bounds,
            slope_error,
        })
    }

    pub fn adaptive(eta: f64, bounds: PriceBounds) -> Result<Self> {
        Self::new(eta, ControllerMode::Adaptive, bounds, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mode(&self) -> ControllerMode {
        self.mode
    }

    pub fn bounds(&self) -> PriceBounds {
        self.bounds
    }

    pub fn slope_error(&self) -> f64 {
        self.slope_error
    }

    /// The operating point used for the update that follows `lambda_prev`.
    pub fn operating_point(&self, lambda_prev: f64) -> f64 {
        match self.mode {
            ControllerMode::Fixed { lambda_o } => lambda_o,
            _ => lambda_prev,
        }
    }
}

/// `clamp(λ_{k-1} − 2η·e_{k-1} / (ṡ(λ_o) − ẇ̃(λ_o)))`.
///
/// The derivatives come from the honest models: the operator does not know an
/// attack is running. In direct-feedback mode this still applies the
/// proportional law at `λ_o = λ_{k-1}`; use [`direct_feedback_update`] for the
/// persistence rule.
pub fn stabilizing_update<D, S>(
    cfg: &ControllerConfig,
    lambda_prev: f64,
    e_prev: f64,
    demand: &D,
    supply: &S,
) -> Result<f64>
where
    D: DemandModel + ?Sized,
    S: SupplyModel + ?Sized,
{
    let lo = cfg.operating_point(lambda_prev);
    let w_est = (1.0 - cfg.slope_error) * demand.slope(lo)?;
    let denom = supply.slope(lo)? - w_est;
    if !(denom > 0.0) {
        return Err(Error::Controller(denom));
    }
    Ok(cfg
        .bounds
        .clamp(lambda_prev - 2.0 * cfg.eta * e_prev / denom))
}

/// `clamp(s⁻¹(d_{k-1}))`. Demand at or below the supply intercept has no
/// positive inverse and is reported as an error; callers that want to keep
/// going use `bounds.min()`.
pub fn direct_feedback_update<S>(supply: &S, d_prev: f64, bounds: &PriceBounds) -> Result<f64>
where
    S: SupplyModel + ?Sized,
{
    Ok(bounds.clamp(supply.inverse(d_prev)?))
}

/// Admissible relative error of the demand-slope estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeErrorBound {
    /// `(1 − η)(1 − ṡ/ẇ)`: the loop is stable iff `E_w` is below this.
    pub exact: f64,
    /// `1 − η`: sufficient whatever the slopes are.
    pub conservative: f64,
}

/// Bounds on `E_w` keeping the linearised loop stable.
pub fn estimation_error_bound(eta: f64, s_slope: f64, w_slope: f64) -> Result<SlopeErrorBound> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "gain must lie in (0, 1)",
        });
    }
    if !(s_slope > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s_slope",
            value: s_slope,
            reason: "supply slope must be > 0",
        });
    }
    if !(w_slope < 0.0) {
        return Err(Error::InvalidParameter {
            name: "w_slope",
            value: w_slope,
            reason: "demand slope must be < 0",
        });
    }
    Ok(SlopeErrorBound {
        exact: (1.0 - eta) * (1.0 - s_slope / w_slope),
        conservative: 1.0 - eta,
    })
}

/// Pole of the unattacked linearised loop, `1 − 2η(ṡ − ẇ)/(ṡ − ẇ̃)`.
pub fn linearized_pole(eta: f64, s_slope: f64, w_slope: f64, slope_error: f64) -> f64 {
    let est = s_slope - (1.0 - slope_error) * w_slope;
    1.0 - 2.0 * eta * (s_slope - w_slope) / est
}

/// Iterates the unattacked linearised loop from `λ_0 − λ* = x0`:
/// `x_{k+1} = x_k − 2η·e_k/(ṡ − ẇ̃)` with `e_k = (ṡ − ẇ)·x_k`.
/// Returns `x_0 … x_steps`.
pub fn linearized_deviation(
    eta: f64,
    s_slope: f64,
    w_slope: f64,
    slope_error: f64,
    x0: f64,
    steps: usize,
) -> Vec<f64> {
    let est = s_slope - (1.0 - slope_error) * w_slope;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut x = x0;
    xs.push(x);
    for _ in 0..steps {
        let e = (s_slope - w_slope) * x;
        x -= 2.0 * eta * e / est;
        xs.push(x);
    }
    xs
}
