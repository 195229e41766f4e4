//! Complex-valued samples on a periodic grid.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Grid, MAX_DIM};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct Field<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Complex<T>>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    pub fn from_real(grid: &Arc<Grid<T>>, values: &[T]) -> Result<Self> {
        Self::from_values(grid, values.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// Samples `f` at every grid point (coordinates per axis, unused axes zero).
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(&[T; MAX_DIM]) -> Complex<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid: Arc::clone(grid), values }
    }

    pub fn from_real_fn(grid: &Arc<Grid<T>>, f: impl Fn(&[T; MAX_DIM]) -> T) -> Self {
        Self::from_fn(grid, |x| Complex::new(f(x), T::zero()))
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec()
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scaled_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x + y * a).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(T::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-T::one(), other)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Index of the largest modulus (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = (0, T::neg_infinity());
        for (i, z) in self.values.iter().enumerate() {
            let a = z.norm_sqr();
            if a > best.1 {
                best = (i, a);
            }
        }
        best.0
    }

    /// Largest modulus over the box faces (index 0 on any axis).
    pub fn boundary_max_abs(&self) -> T {
        let spec = self.grid.spec();
        let mut m = T::zero();
        for (i, z) in self.values.iter().enumerate() {
            let idx = spec.unravel(i);
            if (0..spec.d()).any(|j| idx[j] == 0) {
                m = m.max(z.norm());
            }
        }
        m
    }
}
