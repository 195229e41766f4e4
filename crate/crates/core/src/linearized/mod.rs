//! Linearization at a bound state: the real operators `L1`, `L2`, their
//! lowest eigenpairs, and the slope identity relating `L1` to `m'(omega)`.

mod eigen;
mod operator;
mod vk;

pub use eigen::{lowest_eigs, EigenOptions, EigenPair, Spectrum, MAX_EIGS};
pub use operator::{LinearizedOperator, OperatorKind};
pub use vk::{vk_slope_test, SlopeTestReport, VK_WARN_RESIDUAL};
