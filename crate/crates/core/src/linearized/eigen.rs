//! Smallest eigenpairs of a linearized operator by block Davidson
//! iteration with a diagonal Fourier preconditioner.
//!
//! The search space is kept orthonormal in the plain Euclidean product of
//! grid samples. Each sweep solves the projected problem densely, then adds
//! preconditioned residuals `(1 + sigma(kappa))^{-1} r` of the unconverged
//! Ritz pairs, where `sigma` is the constant-coefficient part of the symbol.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::output::{csv_row, real17};
use crate::scalar::{to_f64, Real};

use super::LinearizedOperator;

pub const MAX_EIGS: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Required `|L v - lambda v| / |v|`.
    pub tol: f64,
    pub max_matvecs: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_matvecs: 2000, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair<T: Real> {
    pub lambda: T,
    pub residual: T,
    /// Real eigenfield normalized to unit Euclidean norm of samples.
    pub vector: Field<T>,
}

#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub pairs: Vec<EigenPair<T>>,
    pub matvecs: usize,
    /// The estimate of the largest eigenvalue used for relative thresholds.
    pub scale: T,
}

impl<T: Real> Spectrum<T> {
    pub fn eigenvalues(&self) -> Vec<T> {
        self.pairs.iter().map(|e| e.lambda).collect()
    }

    /// Eigenvalues below `-threshold * scale`.
    pub fn count_negative(&self, threshold: T) -> usize {
        self.pairs.iter().filter(|e| e.lambda < -threshold * self.scale).count()
    }

    /// `index,lambda,residual` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda,residual\n");
        for (i, e) in self.pairs.iter().enumerate() {
            out.push_str(&csv_row([i.to_string(), real17(e.lambda), real17(e.residual)]));
            out.push('\n');
        }
        out
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Orthogonalizes `v` against `basis` (two Gram-Schmidt passes) and
/// normalizes it. Returns `None` when nothing independent is left.
fn orthonormalize<T: Real>(mut v: Vec<T>, basis: &[Vec<T>]) -> Option<Vec<T>> {
    let n0 = norm(&v);
    if !(n0 > T::zero()) {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(&v, b);
            for (x, &y) in v.iter_mut().zip(b) {
                *x = *x - c * y;
            }
        }
    }
    let n = norm(&v);
    if !(n > n0 * T::from(1e-10).unwrap()) {
        return None;
    }
    for x in v.iter_mut() {
        *x = *x / n;
    }
    Some(v)
}

/// The `n_eigs` smallest eigenpairs of `op`.
pub fn lowest_eigs<T: Real>(op: &LinearizedOperator<T>, n_eigs: usize, opts: &EigenOptions) -> Result<Spectrum<T>> {
    if n_eigs == 0 || n_eigs > MAX_EIGS {
        return Err(Error::InvalidParams(format!("n_eigs must be in 1..={MAX_EIGS}, got {n_eigs}")));
    }
    let grid = op.profile().grid().clone();
    let len = grid.len();
    let block = n_eigs + 2;
    if len < 4 * block {
        return Err(Error::InvalidParams("grid too small for the requested eigenpairs".into()));
    }
    let max_dim = (6 * block).max(24).min(len);
    let precond: Vec<T> = op.symbol().iter().map(|&s| T::one() / (T::one() + s)).collect();
    let apply_precond = |v: &[T]| -> Vec<T> {
        let mut buf: Vec<_> = v.iter().map(|&x| num_complex::Complex::new(x, T::zero())).collect();
        grid.forward(&mut buf);
        for (z, &w) in buf.iter_mut().zip(&precond) {
            *z = *z * w;
        }
        grid.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect::<Vec<T>>()
    };

    // Smooth random start: white noise passed twice through the preconditioner.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut images: Vec<Vec<T>> = Vec::new();
    let mut matvecs = 0usize;
    while basis.len() < block {
        let noise: Vec<T> = (0..len).map(|_| T::from(rng.gen_range(-1.0..1.0)).unwrap()).collect();
        if let Some(v) = orthonormalize(apply_precond(&apply_precond(&noise)), &basis) {
            images.push(op.apply_real(&v));
            matvecs += 1;
            basis.push(v);
        }
    }

    let tol = T::from(opts.tol).unwrap();
    loop {
        let m = basis.len();
        let mut h = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let hij = 0.5 * (to_f64(dot(&basis[i], &images[j])) + to_f64(dot(&basis[j], &images[i])));
                h[(i, j)] = hij;
                h[(j, i)] = hij;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut ritz = Vec::with_capacity(block);
        for &col in order.iter().take(block) {
            let theta = T::from(eig.eigenvalues[col]).unwrap();
            let mut x = vec![T::zero(); len];
            let mut ax = vec![T::zero(); len];
            for i in 0..m {
                let c = T::from(eig.eigenvectors[(i, col)]).unwrap();
                for ((xv, axv), (&b, &ab)) in x.iter_mut().zip(ax.iter_mut()).zip(basis[i].iter().zip(&images[i])) {
                    *xv = *xv + c * b;
                    *axv = *axv + c * ab;
                }
            }
            let r: Vec<T> = ax.iter().zip(&x).map(|(&a, &b)| a - theta * b).collect();
            let rn = norm(&r) / norm(&x);
            ritz.push((theta, x, ax, r, rn));
        }

        let worst = ritz.iter().take(n_eigs).map(|r| r.4).fold(T::zero(), T::max);
        if worst <= tol {
            let pairs = ritz
                .into_iter()
                .take(n_eigs)
                .map(|(theta, x, _, _, rn)| {
                    let nx = norm(&x);
                    let v: Vec<T> = x.iter().map(|&a| a / nx).collect();
                    Ok(EigenPair { lambda: theta, residual: rn, vector: Field::from_real(&grid, &v)? })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Spectrum { pairs, matvecs, scale: op.scale() });
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence { matvecs, residual: to_f64(worst) });
        }

        if m + block > max_dim {
            // Thick restart on the current Ritz vectors.
            basis.clear();
            images.clear();
            for (_, x, ax, _, _) in &ritz {
                let nx = norm(x);
                basis.push(x.iter().map(|&a| a / nx).collect());
                images.push(ax.iter().map(|&a| a / nx).collect());
            }
            // Re-orthonormalize to remove drift, updating images linearly.
            let mut q: Vec<Vec<T>> = Vec::new();
            let mut aq: Vec<Vec<T>> = Vec::new();
            for (v, av) in basis.iter().zip(&images) {
                let mut w = v.clone();
                let mut aw = av.clone();
                for (b, ab) in q.iter().zip(&aq) {
                    let c = dot(&w, b);
                    for ((x, ax), (&y, &ay)) in w.iter_mut().zip(aw.iter_mut()).zip(b.iter().zip(ab)) {
                        *x = *x - c * y;
                        *ax = *ax - c * ay;
                    }
                }
                let n = norm(&w);
                if n > T::from(1e-8).unwrap() {
                    q.push(w.iter().map(|&a| a / n).collect());
                    aq.push(aw.iter().map(|&a| a / n).collect());
                }
            }
            basis = q;
            images = aq;
        }

        let mut added = 0;
        for (_, _, _, r, rn) in &ritz {
            if *rn <= tol {
                continue;
            }
            if let Some(t) = orthonormalize(apply_precond(r), &basis) {
                images.push(op.apply_real(&t));
                matvecs += 1;
                basis.push(t);
                added += 1;
            }
        }
        if added == 0 {
            return Err(Error::NoConvergence { matvecs, residual: to_f64(worst) });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{phi_profile, ModelParams, ProfileSource};
    use crate::grid::{Grid, GridSpec};
    use crate::linearized::OperatorKind;

    fn cubic_profile(n: usize, l: f64) -> Field<f64> {
        let params = ModelParams::new(1, 0, 2.0, 1.0).unwrap().with_omega(1.0).unwrap();
        let g = Grid::new(GridSpec::cubic(1, 0, n, l).unwrap());
        phi_profile(&params, ProfileSource::Exact1d, &g).unwrap()
    }

    #[test]
    fn cubic_l1_ground_and_translation_modes() {
        let phi = cubic_profile(512, 64.0);
        let op = LinearizedOperator::new(OperatorKind::L1, &phi, 1.0, 1.0, 2.0).unwrap();
        let spec = lowest_eigs(&op, 3, &EigenOptions::default()).unwrap();
        let ev = spec.eigenvalues();
        assert!((ev[0] + 3.0).abs() < 1e-8, "{ev:?}");
        assert!(ev[1].abs() < 1e-8, "{ev:?}");
        assert!(ev[2] > 0.9, "{ev:?}");
        assert_eq!(spec.count_negative(1e-6), 1);
        for e in &spec.pairs {
            assert!(e.residual <= 1e-7);
        }
        let csv = spec.to_csv();
        assert!(csv.starts_with("index,lambda,residual\n0,-"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn l2_kernel_is_the_profile() {
        let phi = cubic_profile(512, 64.0);
        let op = LinearizedOperator::new(OperatorKind::L2, &phi, 1.0, 1.0, 2.0).unwrap();
        let spec = lowest_eigs(&op, 2, &EigenOptions::default()).unwrap();
        assert!(spec.pairs[0].lambda.abs() < 1e-8);
        let v = &spec.pairs[0].vector;
        let overlap: f64 = v.values().iter().zip(phi.values()).map(|(a, b)| a.re * b.re).sum::<f64>().abs();
        let nphi: f64 = phi.values().iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        assert!((overlap / nphi - 1.0).abs() < 1e-8);
        assert!(spec.pairs[1].lambda > 0.5);
    }

    #[test]
    fn rejects_bad_requests() {
        let phi = cubic_profile(64, 48.0);
        let op = LinearizedOperator::new(OperatorKind::L1, &phi, 1.0, 1.0, 2.0).unwrap();
        assert!(lowest_eigs(&op, 0, &EigenOptions::default()).is_err());
        assert!(lowest_eigs(&op, 9, &EigenOptions::default()).is_err());
        let starved = EigenOptions { max_matvecs: 3, ..EigenOptions::default() };
        assert!(matches!(lowest_eigs(&op, 2, &starved), Err(Error::NoConvergence { .. })));
    }
}
