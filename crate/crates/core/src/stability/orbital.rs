//! Distance from a field to the orbit `{e^{i theta} phi(. - s)}`.
//!
//! With `hat` denoting the grid transform and `W(kappa)` the metric weight
//! (`1 + |kappa|^2` for `H^1`, `1` for `L^2`), the correlation
//!
//! ```text
//! c(y) = (h^d / N) sum_kappa W u_hat conj(phi_hat) e^{i kappa . y}
//! ```
//!
//! equals `(u(. + y), phi)_W` as a complex pairing. All lattice shifts come
//! from one inverse transform; the best lattice shift then seeds a Newton
//! iteration on `|c(y)|^2` over continuous `y`, which is cheap because `c` is
//! a trigonometric polynomial. For fixed `y` the optimal phase is
//! `theta = -arg c(y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::Field;
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{inner, InnerWeight};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    H1,
    L2,
}

#[derive(Clone, Debug)]
pub struct OrbitalFit<T: Real> {
    /// Optimal phase in `[0, 2 pi)`.
    pub theta: T,
    /// Optimal shift; `w(x) = e^{i theta} u(x + shift)`.
    pub shift: Vec<T>,
    /// The best lattice shift before refinement.
    pub lattice_shift: Vec<T>,
    pub aligned: Field<T>,
    /// `|w - phi|` in the chosen metric.
    pub distance: T,
    pub metric: Metric,
}

impl<T: Real> OrbitalFit<T> {
    /// `(w, i phi)_2`, which vanishes at the optimal phase for the `L^2`
    /// metric.
    pub fn phase_pairing(&self, phi: &Field<T>) -> Result<T> {
        let iphi = phi.scaled_complex(Complex::new(T::zero(), T::one()));
        inner(&self.aligned, &iphi, InnerWeight::L2)
    }

    /// `(w, d phi / d x_j)_2` for every axis.
    pub fn translation_pairings(&self, phi: &Field<T>) -> Result<Vec<T>> {
        (0..phi.grid().d())
            .map(|j| {
                let dphi = crate::spectral::apply_multiplier(phi, crate::spectral::Multiplier::Grad(j), T::one())?;
                inner(&self.aligned, &dphi, InnerWeight::L2)
            })
            .collect()
    }
}

fn weight<T: Real>(metric: Metric, k2: T) -> T {
    match metric {
        Metric::H1 => T::one() + k2,
        Metric::L2 => T::one(),
    }
}

fn norm<T: Real>(u: &Field<T>, metric: Metric) -> Result<T> {
    let w = match metric {
        Metric::H1 => InnerWeight::H1,
        Metric::L2 => InnerWeight::L2,
    };
    Ok(inner(u, u, w)?.max(T::zero()).sqrt())
}

struct Correlation<T> {
    /// `(h^d / N) W u_hat conj(phi_hat)` per mode.
    coeff: Vec<Complex<T>>,
    /// Wavevector of each mode, `d` entries per mode.
    kappa: Vec<T>,
    d: usize,
}

impl<T: Real> Correlation<T> {
    /// `c(y)`, its gradient and Hessian.
    fn eval(&self, y: &[T]) -> (Complex<T>, Vec<Complex<T>>, Vec<Complex<T>>) {
        let d = self.d;
        let mut c = Complex::new(T::zero(), T::zero());
        let mut g = vec![c; d];
        let mut h = vec![c; d * d];
        let i = Complex::new(T::zero(), T::one());
        for (m, &a) in self.coeff.iter().enumerate() {
            let k = &self.kappa[m * d..(m + 1) * d];
            let phase = k.iter().zip(y).fold(T::zero(), |acc, (&kj, &yj)| acc + kj * yj);
            let t = a * Complex::from_polar(T::one(), phase);
            c = c + t;
            for j in 0..d {
                g[j] = g[j] + i * t * k[j];
                for l in 0..d {
                    h[j * d + l] = h[j * d + l] - t * (k[j] * k[l]);
                }
            }
        }
        (c, g, h)
    }
}

/// Closest point of the orbit of `phi` to `u`.
pub fn orbital_distance<T: Real>(u: &Field<T>, phi: &Field<T>, metric: Metric) -> Result<OrbitalFit<T>> {
    u.check_grid(phi)?;
    let grid = u.grid().clone();
    let spec = grid.spec();
    let d = spec.d();
    let scale = grid.cell_volume() / lit::<T>(spec.len() as f64);

    let mut uh = u.values().to_vec();
    grid.forward(&mut uh);
    let mut ph = phi.values().to_vec();
    grid.forward(&mut ph);
    let coeff: Vec<Complex<T>> = uh
        .iter()
        .zip(&ph)
        .zip(grid.k_squared())
        .map(|((&a, &b), &k2)| a * b.conj() * (weight(metric, k2) * scale))
        .collect();

    // Lattice search: c(y_n) = N * IFFT(coeff)[n].
    let mut lattice = coeff.clone();
    grid.inverse(&mut lattice);
    let best = lattice
        .iter()
        .enumerate()
        .fold((0usize, T::zero()), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
    let idx = spec.unravel(best.0);
    let lattice_shift: Vec<T> = (0..d)
        .map(|j| {
            // Map the index to the signed shift nearest zero.
            let n = spec.dims()[j];
            let i = idx[j] as f64;
            let signed = if idx[j] > n / 2 { i - n as f64 } else { i };
            lit(signed * spec.spacing(j))
        })
        .collect();

    let mut kappa = Vec::with_capacity(spec.len() * d);
    for flat in 0..spec.len() {
        let ix = spec.unravel(flat);
        for (j, &i) in ix.iter().enumerate().take(d) {
            // The Nyquist mode is held fixed, as in the spectral gradient.
            let k = if spec.is_nyquist(j, i) { T::zero() } else { grid.axis_wavenumbers(j)[i] };
            kappa.push(k);
        }
    }
    let corr = Correlation { coeff, kappa, d };

    // Newton ascent on |c(y)|^2 from the lattice optimum, confined to one cell.
    let mut y = lattice_shift.clone();
    let (mut c, _, _) = corr.eval(&y);
    let h_min = (0..d).map(|j| spec.spacing(j)).fold(f64::INFINITY, f64::min);
    for _ in 0..20 {
        let (cc, g, h) = corr.eval(&y);
        let cc_conj = cc.conj();
        let grad = DVector::from_iterator(d, g.iter().map(|gj| to_f64(lit::<T>(2.0) * (cc_conj * gj).re)));
        let hess = DMatrix::from_fn(d, d, |j, l| to_f64(lit::<T>(2.0) * (g[j].conj() * g[l] + cc_conj * h[j * d + l]).re));
        let Some(step) = hess.clone().lu().solve(&(-&grad)) else { break };
        if step.iter().any(|s| !s.is_finite()) || step.norm() > h_min {
            break;
        }
        let trial: Vec<T> = y.iter().zip(step.iter()).map(|(&yj, &s)| yj + lit(s)).collect();
        let (ct, _, _) = corr.eval(&trial);
        if ct.norm() < cc.norm() {
            break;
        }
        y = trial;
        c = ct;
        if step.norm() < 1e-14 * h_min.max(1.0) {
            break;
        }
    }

    let two_pi = lit::<T>(std::f64::consts::TAU);
    let mut theta = -c.arg();
    if theta < T::zero() {
        theta = theta + two_pi;
    }
    if theta >= two_pi {
        theta = theta - two_pi;
    }
    let rot = Complex::from_polar(T::one(), theta);
    let mut wh: Vec<Complex<T>> = uh
        .iter()
        .enumerate()
        .map(|(m, &a)| {
            let k = &corr.kappa[m * d..(m + 1) * d];
            let phase = k.iter().zip(&y).fold(T::zero(), |acc, (&kj, &yj)| acc + kj * yj);
            a * rot * Complex::from_polar(T::one(), phase)
        })
        .collect();
    grid.inverse(&mut wh);
    let aligned = Field::from_values(&grid, wh)?;
    let distance = norm(&aligned.sub(phi)?, metric)?;
    Ok(OrbitalFit { theta, shift: y, lattice_shift, aligned, distance, metric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};

    fn gaussian_pair() -> (Field<f64>, Field<f64>) {
        let g = Grid::new(GridSpec::cubic(2, 1, 96, 24.0).unwrap());
        let phi = Field::from_real_fn(&g, |x: &[f64; 3]| (-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp());
        let u = Field::from_fn(&g, |x: &[f64; 3]| {
            let (a, b) = (x[0] - 1.5, x[1] + 0.5);
            Complex::from_polar((-(a * a + 2.0 * b * b) / 2.0).exp(), 1.0)
        });
        (u, phi)
    }

    #[test]
    fn recovers_on_lattice_shift_and_phase() {
        let (u, phi) = gaussian_pair();
        let fit = orbital_distance(&u, &phi, Metric::H1).unwrap();
        assert!(fit.distance < 1e-12, "{}", fit.distance);
        assert!((fit.theta - (std::f64::consts::TAU - 1.0)).abs() < 1e-12);
        assert!((fit.shift[0] - 1.5).abs() < 1e-10 && (fit.shift[1] + 0.5).abs() < 1e-10, "{:?}", fit.shift);
    }

    #[test]
    fn sub_lattice_shift_is_refined() {
        let g = Grid::new(GridSpec::cubic(1, 0, 64, 16.0).unwrap());
        let phi = Field::from_real_fn(&g, |x: &[f64; 3]| (-x[0] * x[0]).exp());
        let u = Field::from_real_fn(&g, |x: &[f64; 3]| (-(x[0] - 0.1) * (x[0] - 0.1)).exp());
        let fit = orbital_distance(&u, &phi, Metric::L2).unwrap();
        assert!((fit.shift[0] - 0.1).abs() < 1e-9, "{:?}", fit.shift);
        assert!(fit.distance < 1e-9);
        assert_eq!(fit.lattice_shift[0], 0.0);
    }

    #[test]
    fn l2_fit_is_phase_orthogonal() {
        let (u, phi) = gaussian_pair();
        let noisy = u.add(&Field::from_fn(u.grid(), |x: &[f64; 3]| Complex::new(0.01 * x[0].sin(), 0.02 * x[1].cos()))).unwrap();
        let fit = orbital_distance(&noisy, &phi, Metric::L2).unwrap();
        assert!(fit.phase_pairing(&phi).unwrap().abs() < 1e-12);
        for t in fit.translation_pairings(&phi).unwrap() {
            assert!(t.abs() < 1e-10, "{t}");
        }
    }
}
