//! Periodic tensor-product grids.
//!
//! A [`GridSpec`] is plain metadata (dimension, number of regularized axes,
//! points and box length per axis). A [`Grid`] adds the per-axis FFT plans and
//! the wavenumber lattice; fields share it through an `Arc`.
//!
//! Axis `j` holds the points `x_i = (i - n_j/2) h_j`, so the origin sits on
//! index `n_j/2`. The last `k` axes are the regularized (`y`) directions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    k: usize,
    dims: Vec<usize>,
    lengths: Vec<f64>,
}

impl GridSpec {
    pub fn new(d: usize, k: usize, dims: &[usize], lengths: &[f64]) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if k > d {
            return Err(Error::InvalidGrid(format!("k = {k} exceeds d = {d}")));
        }
        if dims.len() != d || lengths.len() != d {
            return Err(Error::InvalidGrid(format!(
                "expected {d} dims and lengths, got {} and {}",
                dims.len(),
                lengths.len()
            )));
        }
        for &n in dims {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("axis size {n} must be even and at least 8")));
            }
        }
        for &l in lengths {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("box length {l} must be positive")));
            }
        }
        Ok(Self { d, k, dims: dims.to_vec(), lengths: lengths.to_vec() })
    }

    /// Same number of points and box length on every axis.
    pub fn cubic(d: usize, k: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(d, k, &vec![n; d], &vec![length; d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.d).map(|j| self.spacing(j)).product()
    }

    pub fn box_volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Whether `axis` is one of the last `k` (regularized) axes.
    pub fn is_y_axis(&self, axis: usize) -> bool {
        axis >= self.d - self.k
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.d];
        for j in (0..self.d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.dims[j + 1];
        }
        strides
    }

    /// Splits a flat index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for j in (0..self.d).rev() {
            idx[j] = flat % self.dims[j];
            flat /= self.dims[j];
        }
        idx
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        (i as f64 - (self.dims[axis] / 2) as f64) * self.spacing(axis)
    }

    /// Signed frequency index in FFT order: `0, 1, .., n/2-1, -n/2, .., -1`.
    pub fn frequency_index(&self, axis: usize, i: usize) -> i64 {
        let n = self.dims[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * self.frequency_index(axis, i) as f64 / self.lengths[axis]
    }

    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.dims[axis] / 2
    }

    /// Largest wavenumber magnitude `pi / h` over all axes.
    pub fn max_wavenumber(&self) -> f64 {
        (0..self.d).map(|j| PI / self.spacing(j)).fold(0.0, f64::max)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} k={} dims={:?} L={:?}", self.d, self.k, self.dims, self.lengths)
    }
}

/// A [`GridSpec`] together with its FFT plans and wavenumber tables.
pub struct Grid<T: Real> {
    spec: GridSpec,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
    wavenumbers: Vec<Vec<T>>,
    k_sq: Vec<T>,
    ky_sq: Vec<T>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec) -> Arc<Self> {
        let mut planner = FftPlanner::new();
        let forward = spec.dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = spec.dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let wavenumbers: Vec<Vec<T>> = (0..spec.d)
            .map(|j| (0..spec.dims[j]).map(|i| lit(spec.wavenumber(j, i))).collect())
            .collect();

        let total = spec.len();
        let mut k_sq = vec![T::zero(); total];
        let mut ky_sq = vec![T::zero(); total];
        for flat in 0..total {
            let idx = spec.unravel(flat);
            let (mut all, mut y) = (T::zero(), T::zero());
            for j in 0..spec.d {
                let kj = wavenumbers[j][idx[j]];
                all = all + kj * kj;
                if spec.is_y_axis(j) {
                    y = y + kj * kj;
                }
            }
            k_sq[flat] = all;
            ky_sq[flat] = y;
        }
        Arc::new(Self { spec, forward, inverse, wavenumbers, k_sq, ky_sq })
    }

    pub fn from_parts(d: usize, k: usize, dims: &[usize], lengths: &[f64]) -> Result<Arc<Self>> {
        Ok(Self::new(GridSpec::new(d, k, dims, lengths)?))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn len(&self) -> usize {
        self.k_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_sq.is_empty()
    }

    pub fn cell_volume(&self) -> T {
        lit(self.spec.cell_volume())
    }

    /// Wavenumbers of one axis in FFT order.
    pub fn axis_wavenumbers(&self, axis: usize) -> &[T] {
        &self.wavenumbers[axis]
    }

    /// `|kappa|^2` on the full lattice.
    pub fn k_squared(&self) -> &[T] {
        &self.k_sq
    }

    /// `|kappa_y|^2` on the full lattice (zero when `k = 0`).
    pub fn ky_squared(&self) -> &[T] {
        &self.ky_sq
    }

    /// Coordinates of a flat index, one entry per axis.
    pub fn point(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.spec.unravel(flat);
        let mut x = [T::zero(); MAX_DIM];
        for j in 0..self.spec.d {
            x[j] = lit(self.spec.coordinate(j, idx[j]));
        }
        x
    }

    /// In-place unnormalized forward DFT over all axes.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform_axes(data, &self.forward);
    }

    /// In-place inverse DFT over all axes, divided by the point count.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform_axes(data, &self.inverse);
        let scale = T::one() / T::from_usize(data.len()).unwrap();
        for z in data.iter_mut() {
            *z = *z * scale;
        }
    }

    fn transform_axes(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        let strides = self.spec.strides();
        let total = data.len();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.spec.dims[axis];
            let stride = strides[axis];
            if stride == 1 {
                // Last axis: rows are contiguous and rustfft batches them.
                plan.process(data);
                continue;
            }
            let mut lines = vec![Complex::new(T::zero(), T::zero()); total];
            let block = n * stride;
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    let dst = &mut lines[line * n..(line + 1) * n];
                    for (i, z) in dst.iter_mut().enumerate() {
                        *z = data[start + i * stride];
                    }
                    line += 1;
                }
            }
            plan.process(&mut lines);
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    let src = &lines[line * n..(line + 1) * n];
                    for (i, z) in src.iter().enumerate() {
                        data[start + i * stride] = *z;
                    }
                    line += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_split() {
        let g = GridSpec::new(1, 0, &[256], &[40.0]).unwrap();
        assert_eq!(g.spacing(0), 0.15625);

        let g = GridSpec::new(2, 1, &[128, 128], &[30.0, 30.0]).unwrap();
        assert!(!g.is_y_axis(0));
        assert!(g.is_y_axis(1));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(2, 3, &[16, 16], &[1.0, 1.0]).is_err());
        assert!(GridSpec::new(1, 0, &[15], &[1.0]).is_err());
        assert!(GridSpec::new(1, 0, &[16], &[0.0]).is_err());
        assert!(GridSpec::new(1, 0, &[16], &[-2.0]).is_err());
        assert!(GridSpec::new(4, 0, &[8, 8, 8, 8], &[1.0; 4]).is_err());
    }

    #[test]
    fn wavenumber_lattice() {
        let g = GridSpec::new(1, 0, &[8], &[2.0 * PI]).unwrap();
        let ks: Vec<f64> = (0..8).map(|i| g.wavenumber(0, i)).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert!(g.is_nyquist(0, 4));
        assert_eq!(g.coordinate(0, 4), 0.0);
    }

    #[test]
    fn unravel_matches_strides() {
        let g = GridSpec::new(3, 1, &[8, 10, 12], &[1.0, 2.0, 3.0]).unwrap();
        let s = g.strides();
        assert_eq!(s, vec![120, 12, 1]);
        let idx = g.unravel(2 * 120 + 3 * 12 + 5);
        assert_eq!(&idx[..3], &[2, 3, 5]);
    }
}
