use thiserror::Error;

use crate::scalar::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("scalar mode mismatch: {left} vs {right}")]
    ModeMismatch { left: Mode, right: Mode },

    #[error("sin term with frequency 0 and nonzero coefficient")]
    SinZeroFrequency,

    #[error("division by a function that is identically zero")]
    DivisionByZeroFunction,

    #[error("division by zero scalar")]
    DivisionByZero,

    #[error("near-singular evaluation: |denominator| = {magnitude:e}{}", nearest_zero_note(*.nearest_zero_distance))]
    NearSingularEvaluation {
        magnitude: f64,
        /// Angular distance (radians) to the closest detected zero of the denominator.
        nearest_zero_distance: Option<f64>,
    },

    #[error("point at the origin is not admissible")]
    OriginError,

    #[error("the full Wronskian vanishes identically (degenerate data)")]
    DegenerateWronskian,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid k-data: {0}")]
    InvalidKData(String),

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("ray passes too close to a singular line or the origin: {0}")]
    SingularRay(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("operation requires exact mode")]
    RequiresExact,

    #[error("float arithmetic error: {0}")]
    Float(String),
}

fn nearest_zero_note(d: Option<f64>) -> String {
    match d {
        Some(d) => format!(", nearest zero at angular distance {d:e}"),
        None => String::new(),
    }
}
