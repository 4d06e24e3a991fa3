use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported jet order {0} (supported: 1..=4)")]
    UnsupportedOrder(usize),

    #[error("multi-index of degree {degree} exceeds jet order {order}")]
    OrderExceeded { degree: usize, order: usize },

    #[error("jet order too low: need {needed}, have {have}")]
    InsufficientOrder { needed: usize, have: usize },

    #[error("division by a (near-)zero value")]
    DivisionByZero,

    #[error("{0} of a non-positive value")]
    NonPositiveArgument(&'static str),

    #[error("non-finite value in evaluation")]
    NonFinite,

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("point outside the admissible domain: {0}")]
    OutsideDomain(String),

    #[error("singular metric: {0}")]
    SingularMetric(String),

    #[error("invalid manifold or map: {0}")]
    InvalidSpec(String),

    #[error("energy density is not constant (relative spread {spread:.3e})")]
    NonConstantEnergy { spread: f64 },

    #[error("input map `{0}` is not harmonic")]
    NotHarmonic(String),

    #[error("unknown map `{0}`")]
    UnknownMap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
