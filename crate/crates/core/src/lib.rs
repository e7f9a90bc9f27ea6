//! Minimal beta-sequences of Pochhammer approximants Ξ_n(t, β).
//!
//! Numerical code is generic over [`scalar::Real`]; the `*64` aliases fix
//! the scalar to `f64`, which is what the solver and CLI use.

pub mod afamily;
pub mod approximant;
pub mod cli;
pub mod coeffs;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod minseq;
pub mod output;
pub mod pochhammer;
pub mod quad;
pub mod scalar;
pub mod sum;

pub use error::{Error, Result};

pub type AFunctionSpec64 = afamily::AFunctionSpec<f64>;
pub type XiValue64 = afamily::XiValue<f64>;
pub type PochhammerEval64 = pochhammer::PochhammerEval<f64>;
pub type CoefficientTable64 = coeffs::CoefficientTable<f64>;
pub type ApproximantEval64 = approximant::ApproximantEval<f64>;
pub type PolyInUSquared64 = approximant::PolyInUSquared<f64>;
