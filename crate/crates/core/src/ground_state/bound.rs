use std::sync::Arc;

use crate::closed_forms::{auto_box_lengths, default_points, phi_profile, ModelParams, ProfileSource, QNorms};
use crate::error::Result;
use crate::field::Field;
use crate::grid::{Grid, GridSpec};
use crate::scalar::Real;

use super::{shoot_radial, RadialProfile, ShootingOptions};

/// A sampled bound state together with the profile it came from.
#[derive(Clone, Debug)]
pub struct BoundState<T: Real> {
    pub phi: Field<T>,
    pub p: T,
    /// `None` for `d = 1`, where the exact `sech` profile is used.
    pub radial: Option<RadialProfile<T>>,
}

impl<T: Real> BoundState<T> {
    pub fn source(&self) -> ProfileSource<'_, T> {
        match &self.radial {
            Some(r) => ProfileSource::Radial(r),
            None => ProfileSource::Exact1d,
        }
    }

    pub fn norms(&self) -> QNorms<T> {
        match &self.radial {
            Some(r) => QNorms::from_radial(r),
            None => QNorms::exact_1d(self.p),
        }
    }
}

/// Grid with the default box `auto_box_lengths(params, omega)` and `n`
/// points per axis (or [`default_points`]).
pub fn auto_grid<T: Real>(params: &ModelParams<T>, omega: T, n: Option<usize>) -> Result<Arc<Grid<T>>> {
    let n = n.unwrap_or_else(|| default_points(params.d, params.p));
    let dims = vec![n; params.d];
    Ok(Grid::new(GridSpec::new(params.d, params.k, &dims, &auto_box_lengths(params, omega))?))
}

/// Samples `phi_omega` for `params.omega` on `grid`, shooting for `Q_{d,p}`
/// when `d > 1`.
pub fn bound_state<T: Real>(params: &ModelParams<T>, grid: &Arc<Grid<T>>) -> Result<BoundState<T>> {
    params.validate()?;
    let radial = if params.d == 1 { None } else { Some(shoot_radial(params.d, params.p, &ShootingOptions::default())?) };
    let source = match &radial {
        Some(r) => ProfileSource::Radial(r),
        None => ProfileSource::Exact1d,
    };
    let phi = phi_profile(params, source, grid)?;
    Ok(BoundState { phi, p: params.p, radial })
}
