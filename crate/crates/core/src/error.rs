use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("moment of order {order} does not exist (requires c > {order}, got c = {c})")]
    MomentDoesNotExist { order: u32, c: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e} after {levels} levels)")]
    QuadratureNonConvergence { tol: f64, estimate: f64, levels: u32 },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("root is not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    InvalidBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("root finder stopped after {iterations} iterations with residual {residual:e}")]
    RootNotConverged { iterations: u32, residual: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("sample of size {n} is too small (need at least {min})")]
    SmallSample { n: usize, min: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no sign-changing bracket for the {coordinate} score equation")]
    NoBracket { coordinate: &'static str },

    #[error("likelihood is unbounded: a data point coincides with the location while ck < 1")]
    SingularLikelihood,

    #[error("empty dataset")]
    EmptyData,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
