use alloc::vec::Vec;

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{Complex, DMatrix, Schur};

use super::CharPoly;
use crate::error::{Error, Result};

/// Roots with magnitude below `1 − ROOT_TOLERANCE` count as inside.
pub const ROOT_TOLERANCE: f64 = 1e-9;

/// Result of the eigenvalue root oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Complex<f64>>,
    pub max_modulus: f64,
    /// `max_modulus < 1 − ROOT_TOLERANCE`.
    pub inside: bool,
}

/// All roots of `poly`, as eigenvalues of its balanced companion matrix.
///
/// Zero trailing coefficients are split off first as exact roots at the
/// origin, which keeps `z^τ`-heavy polynomials well conditioned.
pub fn roots(poly: &CharPoly) -> Result<Vec<Complex<f64>>> {
    let c = poly.coeffs();
    let zeros = c.iter().rev().take_while(|&&x| x == 0.0).count();
    let c = &c[..c.len() - zeros];
    let n = c.len() - 1;
    let mut out = Vec::with_capacity(n + zeros);
    out.extend(core::iter::repeat(Complex::new(0.0, 0.0)).take(zeros));
    match n {
        0 => {}
        1 => out.push(Complex::new(-c[1] / c[0], 0.0)),
        _ => {
            // Companion matrix of the monic polynomial in upper-Hessenberg form.
            let mut m = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                m[(0, j)] = -c[j + 1] / c[0];
            }
            for i in 1..n {
                m[(i, i - 1)] = 1.0;
            }
            balance_parlett_reinsch(&mut m);
            let max_coeff = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let schur = Schur::try_new(m, f64::EPSILON, 100 * n).ok_or(Error::RootFinder {
                degree: n,
                max_coeff,
            })?;
            out.extend(schur.complex_eigenvalues().iter().copied());
        }
    }
    Ok(out)
}

/// Numeric oracle for unit-circle stability: the largest root modulus and
/// whether it is below `1 − ROOT_TOLERANCE`.
pub fn roots_in_unit_circle(poly: &CharPoly) -> Result<RootReport> {
    let roots = roots(poly)?;
    let max_modulus = roots
        .iter()
        .map(|z| libm::hypot(z.re, z.im))
        .fold(0.0, f64::max);
    if !max_modulus.is_finite() {
        return Err(Error::RootFinder {
            degree: poly.degree(),
            max_coeff: poly.coeffs().iter().fold(0.0f64, |a, x| a.max(x.abs())),
        });
    }
    Ok(RootReport {
        inside: max_modulus < 1.0 - ROOT_TOLERANCE,
        max_modulus,
        roots,
    })
}
