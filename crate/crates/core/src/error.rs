use core::fmt;

/// Errors raised by configuration checks and numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// The critical exponent 1/2 was supplied where the construction needs α ≠ 1/2.
    CriticalExponent,
    /// A mode index that is not allowed (for instance `n = 0`).
    InvalidMode(i64),
    /// The control profile has a vanishing coefficient on an active mode.
    ZeroProfileCoefficient(u32),
    /// Sizes of two inputs disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// The horizon is too short for the requested family.
    HorizonTooShort { needed: f64, given: f64 },
    /// A quadrature or truncation budget was exhausted before reaching its tolerance.
    BudgetExceeded(&'static str),
    /// A linear system was singular to working precision.
    Singular,
    /// A normalizing value underflowed; dividing by it would be meaningless.
    Underflow(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::CriticalExponent => {
                write!(f, "alpha = 1/2 is degenerate for this construction")
            }
            Error::InvalidMode(n) => write!(f, "invalid mode index {n}"),
            Error::ZeroProfileCoefficient(n) => {
                write!(f, "control profile coefficient vanishes on mode {n}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::HorizonTooShort { needed, given } => {
                write!(f, "horizon {given} shorter than family support {needed}")
            }
            Error::BudgetExceeded(what) => write!(f, "budget exceeded: {what}"),
            Error::Singular => write!(f, "singular system"),
            Error::Underflow(what) => write!(f, "underflow: {what}"),
        }
    }
}

impl core::error::Error for Error {}
