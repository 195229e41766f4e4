//! Fourier transforms, spectral multipliers and the real inner products.
//!
//! Forward transforms are unnormalized; inverse transforms divide by the point
//! count. With that convention the grid-weighted `l2` norm satisfies
//! `h^d sum |u|^2 = (h^d / N) sum |u_hat|^2`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Fourier-multiplier operators on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    /// `-|kappa|^2`
    Laplacian,
    /// `i kappa_j`, zero at the Nyquist index.
    Grad(usize),
    /// `1 + beta |kappa_y|^2`
    PBeta,
    /// `1 / (1 + beta |kappa_y|^2)`
    PBetaInv,
    /// `1 + |kappa|^2`
    H1Weight,
    /// `1 / (1 + |kappa|^2)`
    H1WeightInv,
}

/// Weights accepted by [`inner`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerWeight<T> {
    L2,
    H1,
    /// The quadratic form of the mass functional, `inner(u, u, Mform) = M(u)`.
    Mform { beta: T },
}

/// Returns the forward (spectral) or inverse (physical) representation.
pub fn transform<T: Real>(field: &Field<T>, direction: Direction) -> Field<T> {
    let mut out = field.clone();
    match direction {
        Direction::Forward => field.grid().forward(out.values_mut()),
        Direction::Inverse => field.grid().inverse(out.values_mut()),
    }
    out
}

/// Real symbol of a multiplier on the full lattice. `Grad` is imaginary and
/// therefore not representable here.
pub fn real_symbol<T: Real>(field: &Field<T>, kind: Multiplier, beta: T) -> Option<Vec<T>> {
    let grid = field.grid();
    let one = T::one();
    let sym = match kind {
        Multiplier::Laplacian => grid.k_squared().iter().map(|&k2| -k2).collect(),
        Multiplier::PBeta => grid.ky_squared().iter().map(|&q| one + beta * q).collect(),
        Multiplier::PBetaInv => grid.ky_squared().iter().map(|&q| one / (one + beta * q)).collect(),
        Multiplier::H1Weight => grid.k_squared().iter().map(|&k2| one + k2).collect(),
        Multiplier::H1WeightInv => grid.k_squared().iter().map(|&k2| one / (one + k2)).collect(),
        Multiplier::Grad(_) => return None,
    };
    Some(sym)
}

/// `inverse(sigma * forward(field))`.
///
/// For `k = 0` the `P_beta` kinds reduce to the identity because the `y`
/// lattice is empty. `beta` must be positive for the `P_beta` kinds.
pub fn apply_multiplier<T: Real>(field: &Field<T>, kind: Multiplier, beta: T) -> Result<Field<T>> {
    if matches!(kind, Multiplier::PBeta | Multiplier::PBetaInv) && !(beta > T::zero()) {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    let mut hat = transform(field, Direction::Forward);
    multiply_spectrum(&mut hat, kind, beta)?;
    hat.grid().clone().inverse(hat.values_mut());
    Ok(hat)
}

/// Multiplies spectral coefficients in place.
pub fn multiply_spectrum<T: Real>(hat: &mut Field<T>, kind: Multiplier, beta: T) -> Result<()> {
    match kind {
        Multiplier::Grad(axis) => {
            let grid = hat.grid().clone();
            let spec = grid.spec();
            if axis >= spec.d() {
                return Err(Error::InvalidParams(format!("axis {axis} out of range for d = {}", spec.d())));
            }
            let ks = grid.axis_wavenumbers(axis);
            for (flat, z) in hat.values_mut().iter_mut().enumerate() {
                let i = spec.unravel(flat)[axis];
                *z = if spec.is_nyquist(axis, i) {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::new(-z.im * ks[i], z.re * ks[i])
                };
            }
        }
        _ => {
            let sym = real_symbol(hat, kind, beta).expect("real symbol");
            for (z, s) in hat.values_mut().iter_mut().zip(sym) {
                *z = *z * s;
            }
        }
    }
    Ok(())
}

/// Real inner product `Re sum u conj(v)` weighted by the cell volume, or its
/// `H^1` / mass-form variants evaluated spectrally.
pub fn inner<T: Real>(u: &Field<T>, v: &Field<T>, weight: InnerWeight<T>) -> Result<T> {
    u.check_grid(v)?;
    let grid = u.grid();
    let h = grid.cell_volume();
    match weight {
        InnerWeight::L2 => Ok(real_dot(u.values(), v.values()) * h),
        InnerWeight::H1 => {
            let uh = transform(u, Direction::Forward);
            let vh = transform(v, Direction::Forward);
            Ok(weighted_dot(uh.values(), vh.values(), grid.k_squared(), T::one()) * spectral_scale(u))
        }
        InnerWeight::Mform { beta } => {
            let uh = transform(u, Direction::Forward);
            let vh = transform(v, Direction::Forward);
            Ok(lit::<T>(0.5) * weighted_dot(uh.values(), vh.values(), grid.ky_squared(), beta) * spectral_scale(u))
        }
    }
}

/// `h^d / N`, the factor turning spectral sums into integrals.
pub(crate) fn spectral_scale<T: Real>(u: &Field<T>) -> T {
    u.grid().cell_volume() / T::from_usize(u.len()).unwrap()
}

/// `sum (re_u re_v + im_u im_v)`; symmetric in its arguments bit for bit.
pub(crate) fn real_dot<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + (a.re * b.re + a.im * b.im))
}

/// `sum (1 + c q) Re(a conj b)` for a lattice table `q`.
pub(crate) fn weighted_dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>], q: &[T], c: T) -> T {
    a.iter()
        .zip(b)
        .zip(q)
        .fold(T::zero(), |acc, ((x, y), &w)| acc + (T::one() + c * w) * (x.re * y.re + x.im * y.im))
}

/// `sum q |a|^2` over the lattice.
pub(crate) fn weighted_norm_sq<T: Real>(a: &[Complex<T>], q: &[T]) -> T {
    a.iter().zip(q).fold(T::zero(), |acc, (x, &w)| acc + w * x.norm_sqr())
}

/// `sum |u|^2 h^d`.
pub fn l2_norm_sq<T: Real>(u: &Field<T>) -> T {
    real_dot(u.values(), u.values()) * u.grid().cell_volume()
}

pub fn h1_norm<T: Real>(u: &Field<T>) -> T {
    inner(u, u, InnerWeight::H1).expect("same grid").max(T::zero()).sqrt()
}

/// `|grad u|_2^2` and `|grad_y u|_2^2` from one transform.
pub fn gradient_norms_sq<T: Real>(u: &Field<T>) -> (T, T) {
    let hat = transform(u, Direction::Forward);
    let s = spectral_scale(u);
    let grid = u.grid();
    (weighted_norm_sq(hat.values(), grid.k_squared()) * s, weighted_norm_sq(hat.values(), grid.ky_squared()) * s)
}

/// `|d u / d x_j|_2^2` for every axis (Nyquist modes excluded, matching `Grad`).
pub fn axis_gradient_norms_sq<T: Real>(u: &Field<T>) -> Vec<T> {
    let hat = transform(u, Direction::Forward);
    let s = spectral_scale(u);
    let grid = u.grid();
    let spec = grid.spec();
    let mut out = vec![T::zero(); spec.d()];
    for (flat, z) in hat.values().iter().enumerate() {
        let idx = spec.unravel(flat);
        for (j, acc) in out.iter_mut().enumerate() {
            if !spec.is_nyquist(j, idx[j]) {
                let kj = grid.axis_wavenumbers(j)[idx[j]];
                *acc = *acc + kj * kj * z.norm_sqr();
            }
        }
    }
    out.into_iter().map(|x| x * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn random_field(grid: &Arc<Grid<f64>>, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..grid.len()).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Field::from_values(grid, vals).unwrap()
    }

    fn grid_2d() -> Arc<Grid<f64>> {
        Grid::new(GridSpec::new(2, 1, &[16, 32], &[6.0, 9.0]).unwrap())
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = Grid::<f64>::new(GridSpec::cubic(2, 1, 16, 5.0).unwrap());
        let one = Field::from_real_fn(&g, |_| 1.0);
        let hat = transform(&one, Direction::Forward);
        assert!((hat.values()[0].re - 256.0).abs() < 1e-12);
        assert!(hat.values()[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn plane_wave_is_single_coefficient() {
        let l = 10.0;
        let g = Grid::<f64>::new(GridSpec::cubic(1, 0, 32, l).unwrap());
        let k1 = 2.0 * PI * 3.0 / l;
        let u = Field::from_fn(&g, |x| Complex::from_polar(1.0, k1 * x[0]));
        let hat = transform(&u, Direction::Forward);
        let big: Vec<usize> = (0..32).filter(|&i| hat.values()[i].norm() > 1e-9).collect();
        assert_eq!(big, vec![3]);
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid_2d();
        let u = random_field(&g, 7);
        let back = transform(&transform(&u, Direction::Forward), Direction::Inverse);
        let err = u.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "round trip error {err}");

        let hat = transform(&u, Direction::Forward);
        let physical = l2_norm_sq(&u);
        let spectral = hat.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * spectral_scale(&u);
        assert!((physical - spectral).abs() <= 1e-12 * physical);
    }

    #[test]
    fn laplacian_of_plane_wave() {
        let l = 12.0;
        let g = Grid::<f64>::new(GridSpec::cubic(1, 0, 64, l).unwrap());
        let k1 = 2.0 * PI * 5.0 / l;
        let u = Field::from_fn(&g, |x| Complex::from_polar(1.0, k1 * x[0]));
        let lap = apply_multiplier(&u, Multiplier::Laplacian, 0.0).unwrap();
        for (a, b) in lap.values().iter().zip(u.values()) {
            assert!((a + b * (k1 * k1)).norm() < 1e-10);
        }
    }

    #[test]
    fn pbeta_identity_cases() {
        let g = grid_2d();
        let one = Field::from_real_fn(&g, |_| 1.0);
        let p = apply_multiplier(&one, Multiplier::PBeta, 0.7).unwrap();
        assert!(p.values().iter().all(|z| (z.re - 1.0).abs() < 1e-13 && z.im.abs() < 1e-13));

        let u = random_field(&g, 3);
        let back = apply_multiplier(&apply_multiplier(&u, Multiplier::PBeta, 0.7).unwrap(), Multiplier::PBetaInv, 0.7)
            .unwrap();
        let err = u.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "composition error {err}");

        // k = 0: P_beta is the identity.
        let g0 = Grid::<f64>::new(GridSpec::cubic(1, 0, 16, 4.0).unwrap());
        let w = random_field(&g0, 9);
        let pw = apply_multiplier(&w, Multiplier::PBeta, 2.0).unwrap();
        assert!(w.values().iter().zip(pw.values()).all(|(a, b)| (a - b).norm() < 1e-13));

        assert!(apply_multiplier(&w, Multiplier::PBeta, 0.0).is_err());
    }

    #[test]
    fn gradient_of_even_field_is_odd() {
        let g = Grid::<f64>::new(GridSpec::cubic(1, 0, 64, 16.0).unwrap());
        let u = Field::from_real_fn(&g, |x| (-x[0] * x[0]).exp() + 0.3 / (1.0 + x[0] * x[0]));
        let du = apply_multiplier(&u, Multiplier::Grad(0), 0.0).unwrap();
        let n = 64;
        for j in 1..n / 2 {
            let a = du.values()[n / 2 + j];
            let b = du.values()[n / 2 - j];
            assert!((a + b).norm() < 1e-12, "j = {j}");
        }
    }

    #[test]
    fn inner_products() {
        let g = Grid::<f64>::new(GridSpec::cubic(1, 0, 512, 40.0).unwrap());
        let phi = Field::from_real_fn(&g, |x| 2f64.sqrt() / x[0].cosh());
        let iphi = phi.scaled_complex(Complex::new(0.0, 1.0));
        assert_eq!(inner(&phi, &iphi, InnerWeight::L2).unwrap(), 0.0);
        let n = inner(&phi, &phi, InnerWeight::L2).unwrap();
        assert!((n - 4.0).abs() < 1e-6, "{n}");

        let g3 = Grid::<f64>::new(GridSpec::cubic(3, 1, 8, 2.5).unwrap());
        let one = Field::from_real_fn(&g3, |_| 1.0);
        assert!((inner(&one, &one, InnerWeight::L2).unwrap() - 2.5f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn inner_products_are_exactly_symmetric() {
        let g = grid_2d();
        let u = random_field(&g, 1);
        let v = random_field(&g, 2);
        for w in [InnerWeight::L2, InnerWeight::H1, InnerWeight::Mform { beta: 0.8 }] {
            assert_eq!(inner(&u, &v, w).unwrap(), inner(&v, &u, w).unwrap());
        }
    }

    #[test]
    fn mass_form_matches_pbeta_pairing() {
        let g = grid_2d();
        let u = random_field(&g, 5);
        let beta = 1.3;
        let m = inner(&u, &u, InnerWeight::Mform { beta }).unwrap();
        let pu = apply_multiplier(&u, Multiplier::PBeta, beta).unwrap();
        let half_pairing = 0.5 * inner(&u, &pu, InnerWeight::L2).unwrap();
        assert!((m - half_pairing).abs() <= 1e-12 * m.abs());
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::<f32>::new(GridSpec::cubic(1, 0, 64, 8.0).unwrap());
        let u = Field::from_real_fn(&g, |x| (-x[0] * x[0]).exp());
        let back = transform(&transform(&u, Direction::Forward), Direction::Inverse);
        let err = u.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0f32, f32::max);
        assert!(err < 1e-5);
    }
}
