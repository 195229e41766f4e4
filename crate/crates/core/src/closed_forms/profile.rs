//! Sampling the bound-state profile `phi_omega` on a grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::ground_state::RadialProfile;
use crate::scalar::{to_f64, Real};

use super::{q_exact_1d, ModelParams};

/// Edge-to-peak ratio above which a sampled profile is rejected.
pub const DECAY_LIMIT: f64 = 1e-10;

/// Where the `omega = 1, beta = 0` profile `Q_{d,p}` comes from.
#[derive(Clone, Copy, Debug)]
pub enum ProfileSource<'a, T> {
    /// The `sech` formula; only valid for `d = 1`.
    Exact1d,
    Radial(&'a RadialProfile<T>),
}

/// Samples `phi_omega(x, y) = omega^{1/p} Q(sqrt(omega) x, sqrt(omega / (1 + beta omega)) y)`.
///
/// Fails with [`Error::InsufficientDecay`] when the largest value on the box
/// faces exceeds [`DECAY_LIMIT`] times the peak.
pub fn phi_profile<T: Real>(params: &ModelParams<T>, source: ProfileSource<'_, T>, grid: &Arc<Grid<T>>) -> Result<Field<T>> {
    params.validate()?;
    params.require_energy_subcritical()?;
    let omega = params.omega()?;
    if grid.d() != params.d || grid.k() != params.k {
        return Err(Error::InvalidParams(format!(
            "grid (d={}, k={}) does not match parameters (d={}, k={})",
            grid.d(),
            grid.k(),
            params.d,
            params.k
        )));
    }
    match source {
        ProfileSource::Exact1d if params.d != 1 => {
            return Err(Error::InvalidParams("the sech profile exists only for d = 1".into()));
        }
        ProfileSource::Radial(r) if r.d != params.d || r.p != params.p => {
            return Err(Error::InvalidParams(format!(
                "radial profile is for (d={}, p={}), parameters ask for (d={}, p={})",
                r.d, r.p, params.d, params.p
            )));
        }
        _ => {}
    }

    let spec = grid.spec();
    let x_scale = omega.sqrt();
    let y_scale = (omega / (T::one() + params.beta * omega)).sqrt();
    let scales: Vec<T> = (0..params.d).map(|j| if spec.is_y_axis(j) { y_scale } else { x_scale }).collect();
    let amp = omega.powf(T::one() / params.p);

    let field = Field::from_real_fn(grid, |x| {
        let r2 = (0..params.d).fold(T::zero(), |acc, j| {
            let s = x[j] * scales[j];
            acc + s * s
        });
        let q = match source {
            ProfileSource::Exact1d => q_exact_1d(params.p, r2.sqrt()),
            ProfileSource::Radial(prof) => prof.value(r2.sqrt()),
        };
        amp * q
    });

    let peak = field.max_abs();
    let ratio = to_f64(field.boundary_max_abs() / peak);
    if !(ratio <= DECAY_LIMIT) {
        return Err(Error::InsufficientDecay { ratio, limit: DECAY_LIMIT });
    }
    Ok(field)
}

/// Box edges wide enough for `phi_omega` to decay below [`DECAY_LIMIT`]:
/// `64 / sqrt(omega)` per axis, stretched by `sqrt(1 + beta omega)` on the
/// regularized axes.
pub fn auto_box_lengths<T: Real>(params: &ModelParams<T>, omega: T) -> Vec<f64> {
    let base = 64.0 / to_f64(omega).sqrt();
    let stretch = (1.0 + to_f64(params.beta * omega)).sqrt();
    (0..params.d).map(|j| if j >= params.d - params.k { base * stretch } else { base }).collect()
}

/// Default points per axis. In one dimension the count also grows with `p`
/// because the profile core narrows like `1/p` relative to its tail.
pub fn default_points<T: Real>(d: usize, p: T) -> usize {
    match d {
        1 => {
            let want = (180.0 * to_f64(p)).max(512.0) as usize;
            want.next_power_of_two()
        }
        2 => 256,
        _ => 64,
    }
}
