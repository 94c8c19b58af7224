//! Adelic cochain complexes of finite posets, computed exactly.
//!
//! The crate is organised bottom-up:
//!
//! * [`poset`]: finite posets, flags, dimension functions, simplicial complexes.
//! * [`exactla`]: exact matrices, Smith normal form, atomic modules, cochain
//!   complexes, cubes and filtrations, cohomology tables.
//! * [`coeff`]: coefficient systems, localization systems, Euler-class
//!   localizations and restricted products.
//! * [`adelic`]: assembly of the adelic complex, its cube decomposition and
//!   adelic cohomology.
//! * [`instances`]: simplicial, Čech/Koszul, number-ring (Hasse) and rank-one
//!   torus instance packs.
//! * [`checks`]: seeded property suites shared by the test-suite and the CLI.

pub mod adelic;
pub mod checks;
pub mod coeff;
pub mod exactla;
pub mod instances;
pub mod poset;
pub mod scalar;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

pub use exactla::matrix::Matrix;

/// Exact rational scalar used for all module maps.
pub type Rational = BigRational;
/// Arbitrary precision integer.
pub type Integer = BigInt;
/// Integer matrices, as consumed by Smith normal form.
pub type IntMatrix = Matrix<BigInt>;
/// Machine-word integer matrices.
pub type SmallIntMatrix = Matrix<i64>;
/// Rational matrices.
pub type RatMatrix = Matrix<BigRational>;
/// Machine-word rational matrices.
pub type SmallRatMatrix = Matrix<Ratio<i64>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a complex: d{}∘d{} is nonzero", .degree + 1, .degree)]
    NotAComplex { degree: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("colimit does not stabilize: {0}")]
    NonStabilizing(String),
    #[error("poset is not catenary")]
    NonCatenary,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("level function not respected by the differential: {0}")]
    FiltrationViolated(String),
    #[error("cube face does not commute: {0}")]
    NonCommutingFace(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPoset(_) => "invalid-poset",
            Error::IndexOutOfRange(_) => "index-out-of-range",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::NotAComplex { .. } => "not-a-complex",
            Error::InvalidMap(_) => "invalid-map",
            Error::Unsupported(_) => "unsupported",
            Error::InsufficientPrecision(_) => "precision",
            Error::NonStabilizing(_) => "stabilization",
            Error::NonCatenary => "non-catenary",
            Error::HypothesisViolated(_) => "hypothesis",
            Error::InvalidSystem(_) => "invalid-system",
            Error::FiltrationViolated(_) => "filtration",
            Error::NonCommutingFace(_) => "non-commuting-face",
            Error::InvalidWindow(_) => "window",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
