use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("support box exceeds grid box on axis {axis}")]
    SupportOutsideGrid { axis: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spacing mismatch on axis {axis}: {left} vs {right}")]
    SpacingMismatch { axis: usize, left: f64, right: f64 },

    #[error("grid is not symmetric under inversion on axis {axis}")]
    NotInversionSymmetric { axis: usize },

    #[error("support [{lo}, {hi}] escapes kernel box [{a}, {b}]")]
    SupportEscapesKernel { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("S f not zero: max|Sf| = {max_abs:e} exceeds threshold {threshold:e}")]
    SfNotZero { max_abs: f64, threshold: f64 },

    #[error(
        "no nonzero iterate up to k_max = {k_max}: input is numerically zero \
         or all z-moments are below tolerance"
    )]
    KMaxExceeded { k_max: usize },

    #[error("input function is numerically zero")]
    NumericallyZero,

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("unsupported derivative: {0}")]
    UnsupportedDerivative(String),

    #[error("trajectory left the domain box at t = {t}")]
    TrajectoryEscape { t: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inclusion violated: {0}")]
    InclusionViolated(String),

    #[error("nonpositive density ratio {value} at {location:?}")]
    NonPositiveRatio { value: f64, location: Vec<f64> },

    #[error("support escapes grid: image point {point:?} lies outside the grid box")]
    SupportEscapesGrid { point: Vec<f64> },

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
