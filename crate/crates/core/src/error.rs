use alloc::string::String;

/// Errors raised by model evaluation, analysis and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter violates its invariant (e.g. elasticity outside (-1, 0)).
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A price outside the model domain (prices must be positive and finite).
    #[error("price {0} is outside the model domain (must be > 0)")]
    PriceDomain(f64),
    /// The inverse supply would produce a non-positive price.
    #[error("supply {supply} does not exceed the intercept {intercept}; inverse price would be non-positive")]
    SupplyInverseDomain { supply: f64, intercept: f64 },
    /// The marginal supply slope vanished where a ratio was required.
    #[error("supply slope is zero at price {0}")]
    SingularSlope(f64),
    /// Calibrating the demand scale produced a non-positive value.
    #[error("calibration failed: baseline {baseline} leaves no room for price-responsive demand (D = {scale})")]
    Calibration { baseline: f64, scale: f64 },
    /// Least-squares fit on degenerate data.
    #[error("cannot fit a line: {0}")]
    DegenerateFit(&'static str),
    /// No price-responsive demand at all, so a demand fraction is undefined.
    #[error("total price-responsive demand is zero; fraction is undefined")]
    UndefinedRatio,
    /// The controller denominator ṡ − ẇ̃ is not strictly positive.
    #[error("controller denominator {0} is not positive (corrupted slope estimate?)")]
    Controller(f64),
    /// Attack specification violates its invariants.
    #[error("invalid attack: {0}")]
    InvalidAttack(String),
    /// A polynomial that cannot be analysed (empty, zero leading coefficient, non-finite).
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),
    /// The eigenvalue-based root finder did not converge.
    #[error(
        "root finder did not converge for a degree-{degree} polynomial (max |coeff| = {max_coeff})"
    )]
    RootFinder { degree: usize, max_coeff: f64 },
    /// The symbolic reduction hit an identically-zero divisor.
    #[error("symbolic reduction degenerated: {0}")]
    Degenerate(&'static str),
    /// A request outside what the analysis supports (e.g. too large a delay for exact arithmetic).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Simulation input violates a precondition.
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    /// A model error raised while simulating a given period.
    #[error("period {period}: {source}")]
    AtPeriod {
        period: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    /// A metric was requested over an empty window.
    #[error("empty window: {0}")]
    EmptyWindow(&'static str),
}

impl Error {
    pub(crate) fn at(self, period: usize) -> Self {
        Error::AtPeriod {
            period,
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Checks `value` is finite and strictly positive.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_price(price: f64) -> Result<f64> {
    if price.is_finite() && price > 0.0 {
        Ok(price)
    } else {
        Err(Error::PriceDomain(price))
    }
}
