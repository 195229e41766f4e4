use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{lit, Real};
use crate::spectral::{inner, InnerWeight, Multiplier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// `-Laplacian + omega P_beta - (p+1) phi^p`, acting on real parts.
    L1,
    /// `-Laplacian + omega P_beta - phi^p`, acting on imaginary parts.
    L2,
}

/// Real self-adjoint operator obtained by linearizing the profile equation
/// at a real profile `phi`.
#[derive(Clone, Debug)]
pub struct LinearizedOperator<T: Real> {
    kind: OperatorKind,
    phi: Field<T>,
    omega: T,
    beta: T,
    p: T,
    /// `|kappa|^2 + omega (1 + beta |kappa_y|^2)`
    symbol: Vec<T>,
    /// `c phi^p` with `c = p + 1` or `1`.
    potential: Vec<T>,
}

impl<T: Real> LinearizedOperator<T> {
    pub fn new(kind: OperatorKind, phi: &Field<T>, omega: T, beta: T, p: T) -> Result<Self> {
        if !(omega > T::zero() && beta > T::zero() && p > T::zero()) {
            return Err(Error::InvalidParams("omega, beta and p must be positive".into()));
        }
        let grid = phi.grid();
        let symbol = grid
            .k_squared()
            .iter()
            .zip(grid.ky_squared())
            .map(|(&k2, &ky2)| k2 + omega * (T::one() + beta * ky2))
            .collect();
        let c = match kind {
            OperatorKind::L1 => p + T::one(),
            OperatorKind::L2 => T::one(),
        };
        let potential = phi.values().iter().map(|z| c * z.re.abs().powf(p)).collect();
        Ok(Self { kind, phi: phi.clone(), omega, beta, p, symbol, potential })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn profile(&self) -> &Field<T> {
        &self.phi
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub(crate) fn symbol(&self) -> &[T] {
        &self.symbol
    }

    /// Upper bound on the spectral radius: largest symbol plus largest
    /// potential.
    pub fn scale(&self) -> T {
        let s = self.symbol.iter().copied().fold(T::zero(), T::max);
        let v = self.potential.iter().copied().fold(T::zero(), T::max);
        s + v
    }

    /// Applies the operator to a real vector of grid samples.
    pub fn apply_real(&self, v: &[T]) -> Vec<T> {
        let grid = self.phi.grid();
        let mut buf: Vec<_> = v.iter().map(|&x| num_complex::Complex::new(x, T::zero())).collect();
        grid.forward(&mut buf);
        for (z, &s) in buf.iter_mut().zip(&self.symbol) {
            *z = *z * s;
        }
        grid.inverse(&mut buf);
        buf.iter().zip(v).zip(&self.potential).map(|((z, &x), &w)| z.re - w * x).collect()
    }

    /// Applies the operator to a field; real and imaginary parts are
    /// treated independently.
    pub fn apply(&self, v: &Field<T>) -> Result<Field<T>> {
        self.phi.check_grid(v)?;
        let mut out = crate::spectral::transform(v, crate::spectral::Direction::Forward);
        for (z, &s) in out.values_mut().iter_mut().zip(&self.symbol) {
            *z = *z * s;
        }
        let grid = out.grid().clone();
        grid.inverse(out.values_mut());
        for ((o, z), &w) in out.values_mut().iter_mut().zip(v.values()).zip(&self.potential) {
            *o = *o - *z * w;
        }
        Ok(out)
    }

    /// `(L v, v)_2 / (v, v)_2`.
    pub fn rayleigh(&self, v: &Field<T>) -> Result<T> {
        let lv = self.apply(v)?;
        Ok(inner(&lv, v, InnerWeight::L2)? / inner(v, v, InnerWeight::L2)?)
    }

    /// `d phi / d x_j` for every axis.
    pub fn translation_modes(&self) -> Vec<Field<T>> {
        (0..self.phi.grid().d())
            .map(|j| crate::spectral::apply_multiplier(&self.phi, Multiplier::Grad(j), T::one()).expect("axis in range"))
            .collect()
    }

    /// Rayleigh quotient of each translation mode divided by [`Self::scale`].
    pub fn translation_rayleigh(&self) -> Result<Vec<T>> {
        let scale = self.scale();
        self.translation_modes()
            .iter()
            .map(|m| Ok(self.rayleigh(&m.map(|z| num_complex::Complex::new(z.re, T::zero())))? / scale))
            .collect()
    }

    /// `|L phi|_2 / |phi|_2`; zero for `L2` at an exact profile.
    pub fn profile_residual(&self) -> Result<T> {
        let lp = self.apply(&self.phi)?;
        let two = lit::<T>(2.0);
        Ok((crate::spectral::l2_norm_sq(&lp) / crate::spectral::l2_norm_sq(&self.phi)).powf(T::one() / two))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{auto_box_lengths, phi_profile, ModelParams, ProfileSource};
    use crate::grid::{Grid, GridSpec};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(k: usize, omega: f64, n: usize) -> Field<f64> {
        let params = ModelParams::new(1, k, 2.0, 1.0).unwrap().with_omega(omega).unwrap();
        let g = Grid::new(GridSpec::new(1, k, &[n], &auto_box_lengths(&params, omega)).unwrap());
        phi_profile(&params, ProfileSource::Exact1d, &g).unwrap()
    }

    #[test]
    fn kernels() {
        let phi = profile(1, 1.0, 1024);
        let l2 = LinearizedOperator::new(OperatorKind::L2, &phi, 1.0, 1.0, 2.0).unwrap();
        assert!(l2.profile_residual().unwrap() <= 1e-10);
        let l1 = LinearizedOperator::new(OperatorKind::L1, &phi, 1.0, 1.0, 2.0).unwrap();
        let dx = &l1.translation_modes()[0];
        let r = l1.apply(dx).unwrap();
        let rel = (crate::spectral::l2_norm_sq(&r) / crate::spectral::l2_norm_sq(dx)).sqrt();
        assert!(rel <= 1e-6, "{rel}");
    }

    #[test]
    fn self_adjoint() {
        let phi = profile(0, 1.0, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [OperatorKind::L1, OperatorKind::L2] {
            let op = LinearizedOperator::new(kind, &phi, 1.0, 1.0, 2.0).unwrap();
            let g = phi.grid();
            let v = Field::from_values(g, (0..g.len()).map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0)).collect()).unwrap();
            let w = Field::from_values(g, (0..g.len()).map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0)).collect()).unwrap();
            let a = inner(&op.apply(&v).unwrap(), &w, InnerWeight::L2).unwrap();
            let b = inner(&v, &op.apply(&w).unwrap(), InnerWeight::L2).unwrap();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(b.abs()), "{a} {b}");
        }
    }

    #[test]
    fn real_and_field_application_agree() {
        let phi = profile(1, 2.0, 256);
        let op = LinearizedOperator::new(OperatorKind::L1, &phi, 2.0, 1.0, 2.0).unwrap();
        let v: Vec<f64> = phi.values().iter().enumerate().map(|(i, z)| z.re * (i as f64 * 0.01).cos()).collect();
        let a = op.apply_real(&v);
        let b = op.apply(&Field::from_real(phi.grid(), &v).unwrap()).unwrap();
        for (x, z) in a.iter().zip(b.values()) {
            assert!((x - z.re).abs() < 1e-12);
        }
    }
}
