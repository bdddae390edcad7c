//! Epsilon-skew Burr III distribution: density, moments, sampling, maximum
//! likelihood fitting, robustness diagnostics and goodness of fit.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`). The aliases below
//! fix the scalar for the common cases.

pub mod burr3;
pub mod error;
pub mod esbiii;
pub mod fit;
pub mod gof;
pub mod rng;
pub mod robust;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params64 = esbiii::Params<f64>;
pub type Params32 = esbiii::Params<f32>;
pub type Burr3Params64 = burr3::Burr3Params<f64>;
pub type Dataset64 = gof::Dataset<f64>;
pub type FitConfig64 = fit::FitConfig<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type GofReport64 = gof::GofReport<f64>;
pub type ScoreReport64 = robust::ScoreReport<f64>;
