use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A real polynomial in `z`, stored with descending powers
/// (`coeffs[0]` multiplies `z^n`).
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

fn check(name: &'static str, ok: bool, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

fn check_loop(h: f64, eta: f64, rho: f64) -> Result<()> {
    check("h", h.is_finite() && h > 0.0, h, "must be finite and > 0")?;
    check("eta", eta > 0.0 && eta < 1.0, eta, "must lie in (0, 1)")?;
    check("rho", rho > 0.0 && rho <= 1.0, rho, "must lie in (0, 1]")
}

fn check_gain(gamma_mu: f64) -> Result<()> {
    check(
        "gamma_mu",
        gamma_mu.is_finite() && gamma_mu > 0.0,
        gamma_mu,
        "must be finite and > 0",
    )
}

impl CharPoly {
    /// Builds from descending coefficients. Leading zeros are dropped; at
    /// least one coefficient must be non-zero and all must be finite.
    pub fn new(descending: Vec<f64>) -> Result<Self> {
        if descending.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient"));
        }
        let first = descending
            .iter()
            .position(|&c| c != 0.0)
            .ok_or(Error::InvalidPolynomial("all coefficients are zero"))?;
        Ok(Self {
            coeffs: descending[first..].to_vec(),
        })
    }

    /// Closed loop under a scaling attack, with `gamma_mu = γ·μ`:
    /// `(h+1)z + 2η(1 + ργμh + h − ρh) − (h+1)`.
    pub fn scaling(h: f64, eta: f64, rho: f64, gamma_mu: f64) -> Result<Self> {
        check_loop(h, eta, rho)?;
        check_gain(gamma_mu)?;
        let lead = h + 1.0;
        Self::new(vec![
            lead,
            2.0 * eta * (1.0 + rho * gamma_mu * h + h - rho * h) - lead,
        ])
    }

    /// Closed loop under a delay attack:
    /// `(h+1)z^{τ+1} + (2η + 2η(1−ρ)h − h − 1)z^τ + 2ηρh`.
    pub fn delay(h: f64, eta: f64, rho: f64, tau: usize) -> Result<Self> {
        Self::scaled_delay(h, eta, rho, tau, 1.0)
    }

    /// Closed loop under a scaled-delay attack; the constant term of
    /// [`CharPoly::delay`] is multiplied by `γμ`.
    pub fn scaled_delay(h: f64, eta: f64, rho: f64, tau: usize, gamma_mu: f64) -> Result<Self> {
        check_loop(h, eta, rho)?;
        check_gain(gamma_mu)?;
        if tau == 0 {
            return Err(Error::InvalidAttack("delay tau must be >= 1".into()));
        }
        let mut c = vec![0.0; tau + 2];
        c[0] = h + 1.0;
        c[1] = 2.0 * eta + 2.0 * eta * (1.0 - rho) * h - h - 1.0;
        c[tau + 1] = 2.0 * eta * rho * h * gamma_mu;
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Descending coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Ascending coefficients (`a_0 … a_n`).
    pub fn ascending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * z + c)
    }

    /// `P(re + i·im)` as `(re, im)`.
    pub fn eval_complex(&self, re: f64, im: f64) -> (f64, f64) {
        self.coeffs.iter().fold((0.0, 0.0), |(ar, ai), &c| {
            (ar * re - ai * im + c, ar * im + ai * re)
        })
    }
}
