//! Ground states: the radial profile `Q_{d,p}` and constrained minimizers of
//! the energy at fixed mass.

mod flow;
mod shooting;

pub use flow::{estimate_omega, minimize_im, FlowOptions, MinimizerResult, MinimizerSidecar};
pub use shooting::{shoot_radial, RadialProfile, ShootingOptions};
mod bound;

pub use bound::{auto_grid, bound_state, BoundState};
