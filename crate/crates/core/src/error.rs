use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quantity is defined only as a limit at the pole (r = {0})")]
    Pole(f64),

    #[error("radius {requested} outside solved range [0, {available}]")]
    Range { requested: f64, available: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("exponent {alpha} lies in the degree spectrum (nearest element {nearest}, distance {distance:e})")]
    InSpectrum {
        alpha: f64,
        nearest: f64,
        distance: f64,
    },

    #[error("constraint violated: {assumption} ({detail})")]
    ConstraintViolation {
        assumption: &'static str,
        detail: String,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("frequency undefined: I(r) = 0 at r = {0}")]
    UndefinedFrequency(f64),

    #[error("degenerate normalization: J({radius}) = {value}")]
    DegenerateNormalization { radius: f64, value: f64 },

    #[error("b is not normalizable: asymptotic volume ratio vanishes (non-maximal volume growth)")]
    NotNormalizable,

    #[error("solution overflowed at r = {reached} before reaching {target}")]
    Overflow { reached: f64, target: f64 },
}
