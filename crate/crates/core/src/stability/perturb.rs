use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{lit, Real};
use crate::spectral::h1_norm;

/// How a bound state is disturbed before evolution.
#[derive(Clone, Debug)]
pub enum Perturbation<T: Real> {
    /// `(1 + amplitude) phi`
    Scale,
    /// `phi + amplitude |phi|_{H^1} xi / |xi|_{H^1}` with complex noise `xi`
    /// supported on `|kappa| <= kappa_max / 4`.
    Noise { seed: u64 },
    /// `phi + amplitude |phi|_{H^1} e / |e|_{H^1}` for a real field `e`,
    /// typically an eigenfield of `L1`.
    Mode(Field<T>),
}

impl<T: Real> Perturbation<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Scale => "scale",
            Self::Noise { .. } => "noise",
            Self::Mode(_) => "mode",
        }
    }
}

/// Seeded complex noise whose Fourier modes vanish outside `|kappa| <= kappa_max / 4`.
pub fn bandlimited_noise<T: Real>(grid: &std::sync::Arc<crate::grid::Grid<T>>, seed: u64) -> Field<T> {
    let cutoff = lit::<T>(grid.spec().max_wavenumber() / 4.0);
    let cutoff_sq = cutoff * cutoff;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat: Vec<Complex<T>> = grid
        .k_squared()
        .iter()
        .map(|&k2| {
            let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if k2 <= cutoff_sq {
                Complex::new(lit(re), lit(im))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    grid.inverse(&mut hat);
    Field::from_values(grid, hat).expect("length matches grid")
}

pub fn perturb<T: Real>(phi: &Field<T>, kind: &Perturbation<T>, amplitude: T) -> Result<Field<T>> {
    if !(amplitude > T::zero() && amplitude.is_finite()) {
        return Err(Error::InvalidParams(format!("perturbation amplitude must be positive, got {amplitude}")));
    }
    let direction = match kind {
        Perturbation::Scale => return Ok(phi.scaled(T::one() + amplitude)),
        Perturbation::Noise { seed } => bandlimited_noise(phi.grid(), *seed),
        Perturbation::Mode(e) => {
            phi.check_grid(e)?;
            e.map(|z| Complex::new(z.re, T::zero()))
        }
    };
    let n = h1_norm(&direction);
    if !(n > T::zero()) {
        return Err(Error::InvalidParams("perturbation direction has zero norm".into()));
    }
    phi.axpy(amplitude * h1_norm(phi) / n, &direction)
}
