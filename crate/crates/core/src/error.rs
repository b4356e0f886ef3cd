use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Diagnostic payloads are stored as `f64` regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma function pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("loss of significance in {what}: only {digits:.1} significant digits survive")]
    LossOfSignificance { what: &'static str, digits: f64 },

    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid model parameter {name} = {value}")]
    InvalidParams { name: &'static str, value: f64 },

    #[error("quadrature hit the subdivision limit ({panels} panels): estimate {value} +/- {err}")]
    SubdivisionLimit { panels: usize, value: f64, err: f64 },

    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("real-line tail bound {tail} not met after expanding to |u| = {reach}")]
    TailBound { tail: f64, reach: f64 },

    #[error("finite-difference step {h} underflows at x = {x}")]
    StepUnderflow { h: f64, x: f64 },

    #[error("nested finite differencing needs derivative order {order}, above the supported depth {max}")]
    Depth { order: usize, max: usize },

    #[error("coherent states are incompatible: {0}")]
    Incompatible(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
