//! Exact polynomial and rational-function arithmetic in one variable, and the
//! iterated reduction that yields the large-`h` stability limit of the delay
//! attack.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial with exact rational coefficients, ascending powers, no trailing
/// zeros (the zero polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn lead(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// Exact division; `None` if `divisor` is zero or leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(divisor)?;
        r.is_zero().then_some(q)
    }

    /// Polynomial long division; `None` for a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> Option<(Poly, Poly)> {
        let dd = divisor.degree()?;
        let lead = divisor.lead()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Some((Poly::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * d;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Some((Poly::new(quot), Poly::new(rem)))
    }

    /// Integer coefficients with the same roots: multiplies through by the
    /// least common denominator.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        self.coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect()
    }

    /// Approximate value at `x`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) - rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// `num / den` with exact coefficients.
///
/// Normalisation cancels common powers of the variable, collapses to a
/// polynomial whenever the denominator divides the numerator exactly, and
/// makes the denominator monic. It does not compute general polynomial GCDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Degenerate("division by the zero polynomial"));
        }
        Ok(Self { num, den }.normalised())
    }

    pub fn poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::constant(BigRational::one()),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some` when the denominator is a constant.
    pub fn as_poly(&self) -> Option<&Poly> {
        (self.den.degree() == Some(0)).then_some(&self.num)
    }

    fn normalised(self) -> Self {
        let Self { mut num, mut den } = self;
        if num.is_zero() {
            return Self::poly(Poly::zero());
        }
        let low = |p: &Poly| p.coeffs.iter().take_while(|c| c.is_zero()).count();
        let shift = low(&num).min(low(&den));
        if shift > 0 {
            num = Poly::new(num.coeffs[shift..].to_vec());
            den = Poly::new(den.coeffs[shift..].to_vec());
        }
        if den.degree() != Some(0) {
            if let Some(q) = num.div_exact(&den) {
                num = q;
                den = Poly::constant(BigRational::one());
            }
        }
        let lead = den.lead().cloned().unwrap_or_else(BigRational::one);
        if !lead.is_one() {
            num = Poly::new(num.coeffs.iter().map(|c| c / &lead).collect());
            den = Poly::new(den.coeffs.iter().map(|c| c / &lead).collect());
        }
        Self { num, den }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
        .normalised()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        if self.den == rhs.den {
            return Self {
                num: &self.num - &rhs.num,
                den: self.den.clone(),
            }
            .normalised();
        }
        Self {
            num: &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
        .normalised()
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Degenerate("division by an identically zero term"));
        }
        Ok(Self {
            num: &self.num * &rhs.den,
            den: &self.den * &rhs.num,
        }
        .normalised())
    }
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// A small-denominator rational close to `x` (exact binary value as fallback).
pub fn rational_approx(x: f64) -> Result<BigRational> {
    if let Some(r) = Ratio::<i64>::approximate_float(x) {
        if (r.to_f64().unwrap_or(f64::NAN) - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Ok(BigRational::new(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            ));
        }
    }
    BigRational::from_float(x).ok_or(Error::InvalidParameter {
        name: "rho",
        value: x,
        reason: "not representable as a rational",
    })
}

/// Largest delay accepted by [`delay_limit_polynomial`]: the numerator degree
/// doubles with every extra period.
pub const MAX_SYMBOLIC_TAU: usize = 12;

/// The polynomial `Q(η | ρ)` whose smallest root in (0, 1) is the large-`h`
/// stability limit of a delay attack with `τ ≥ 2`.
///
/// Starts from `X = 1`, `Y = 2ηρ`, `Z = 2ηρ(1 − 2η(1 − ρ))`, applies
/// `X ← X² − Y²`, `Y ← Z`, `Z ← X·Z²/Y` (all right-hand sides use the values
/// from before the step) `τ − 2` times, and returns `X² − Y² − Z`.
pub fn delay_limit_polynomial(rho: &BigRational, tau: usize) -> Result<RationalFunction> {
    if tau < 2 {
        return Err(Error::Unsupported(format!(
            "the reduction needs tau >= 2, got {tau}"
        )));
    }
    if tau > MAX_SYMBOLIC_TAU {
        return Err(Error::Unsupported(format!(
            "tau = {tau} exceeds the exact-arithmetic limit of {MAX_SYMBOLIC_TAU}"
        )));
    }
    let two_rho = rat(2) * rho;
    let one = Poly::constant(rat(1));
    let mut x = RationalFunction::poly(one);
    let mut y = RationalFunction::poly(Poly::monomial(two_rho.clone(), 1));
    // 2ρη − 4ρ(1 − ρ)η²
    let z0 = Poly::new(vec![
        BigRational::zero(),
        two_rho.clone(),
        -(rat(4) * rho * (rat(1) - rho)),
    ]);
    let mut z = RationalFunction::poly(z0);
    for _ in 0..tau - 2 {
        let next_x = x.mul(&x).sub(&y.mul(&y));
        let next_z = x.mul(&z).mul(&z).div(&y)?;
        x = next_x;
        y = z;
        z = next_z;
    }
    Ok(x.mul(&x).sub(&y.mul(&y)).sub(&z))
}

/// Sign of `p(a/b)` for `b > 0`, computed exactly from integer coefficients.
fn sign_at(coeffs: &[BigInt], a: &BigInt, b: &BigInt) -> Sign {
    // b^d·p(a/b) = Σ c_j a^j b^{d−j}, evaluated by Horner in homogeneous form.
    let mut acc = BigInt::zero();
    let mut bpow = BigInt::one();
    for c in coeffs.iter().rev() {
        acc = acc * a + c * &bpow;
        bpow *= b;
    }
    acc.sign()
}

/// Smallest root of `f` strictly inside (0, 1), located by an exact sign scan
/// over `grid` equal cells followed by bisection down to `tol`. Cells where
/// the denominator also changes sign are skipped. Returns `None` when no sign
/// change is found (double roots are not detected).
pub fn smallest_root_in_unit_interval(f: &RationalFunction, grid: usize, tol: f64) -> Option<f64> {
    let num = f.num.integer_coeffs();
    let den = f.den.integer_coeffs();
    let m = BigInt::from(grid);
    let sign = |c: &[BigInt], a: &BigInt, b: &BigInt| sign_at(c, a, b);
    let mut prev_n = sign(&num, &BigInt::zero(), &m);
    let mut prev_d = sign(&den, &BigInt::zero(), &m);
    for i in 1..grid {
        let a = BigInt::from(i);
        let sn = sign(&num, &a, &m);
        let sd = sign(&den, &a, &m);
        if sn == Sign::NoSign {
            if sd != Sign::NoSign {
                return Some(i as f64 / grid as f64);
            }
        } else if prev_n != Sign::NoSign && sn != prev_n && sd == prev_d {
            return Some(bisect(
                &num,
                (i - 1) as f64 / grid as f64,
                i as f64 / grid as f64,
                prev_n,
                tol,
            ));
        }
        prev_n = sn;
        prev_d = sd;
    }
    let sn = sign(&num, &m, &m);
    if prev_n != Sign::NoSign && sn != Sign::NoSign && sn != prev_n {
        return Some(bisect(
            &num,
            (grid - 1) as f64 / grid as f64,
            1.0,
            prev_n,
            tol,
        ));
    }
    None
}

fn bisect(num: &[BigInt], mut lo: f64, mut hi: f64, lo_sign: Sign, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        // Every f64 is a dyadic rational, so the midpoint converts exactly.
        let r = BigRational::from_float(mid).expect("finite midpoint");
        let s = sign_at(num, r.numer(), r.denom());
        if s == Sign::NoSign {
            return mid;
        }
        if s == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grid size of the sign scan used by the delay limit.
pub const ROOT_SCAN_POINTS: usize = 10_000;
/// Bisection width of the delay limit.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Exact-arithmetic large-`h` limit of the delay-attack gain bound.
pub fn delay_limit_symbolic(rho: f64, tau: usize) -> Result<f64> {
    let r = rational_approx(rho)?;
    let q = delay_limit_polynomial(&r, tau)?;
    if q.is_zero() {
        return Err(Error::Degenerate("Q(eta) vanished identically"));
    }
    Ok(smallest_root_in_unit_interval(&q, ROOT_SCAN_POINTS, ROOT_TOLERANCE).unwrap_or(1.0))
}
