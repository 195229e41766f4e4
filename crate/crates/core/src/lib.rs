//! Numerical laboratory for the partially regularized nonlinear Schrödinger
//! equation
//!
//! ```text
//! i (P_beta u)_t + Laplacian u + |u|^p u = 0,    P_beta u = u - beta Laplacian_y u,
//! ```
//!
//! where `y` collects the last `k` of the `d` coordinates.
//!
//! The crate is generic over the floating-point type (`f32` or `f64`, see
//! [`Real`]); the `*64` aliases below fix the common double-precision case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod error;
pub mod evolution;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod linearized;
pub mod output;
pub mod scalar;
pub mod snapshot;
pub mod spectral;
pub mod stability;

pub use closed_forms::{MassCurve, ModelParams, QNorms, Regime, RegimeReport};
pub use error::{Error, Result};
pub use field::Field;
pub use grid::{Grid, GridSpec};
pub use ground_state::{FlowOptions, MinimizerResult, RadialProfile};
pub use scalar::Real;

/// Semantic version of the library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Field64 = Field<f64>;
pub type Field32 = Field<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type Params64 = ModelParams<f64>;
pub type MassCurve64 = MassCurve<f64>;
pub type RadialProfile64 = RadialProfile<f64>;
