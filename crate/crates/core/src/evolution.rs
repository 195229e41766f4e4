//! Integrating-factor RK4 for `u_t = i P_beta^{-1} (Laplacian u + |u|^p u)`.
//!
//! In Fourier variables `u_hat' = i A u_hat + N(u_hat)` with
//! `A = -|kappa|^2 / (1 + beta |kappa_y|^2)` and
//! `N = i F(|u|^p u) / (1 + beta |kappa_y|^2)`. The linear part is integrated
//! exactly by the factor `exp(i A t)`; the remainder is classical RK4 in the
//! rotated variable (the Lawson scheme).

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{energy, mass};
use crate::grid::Grid;
use crate::output::{csv_row, real17};
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::gradient_norms_sq;

/// Largest admissible `|dt| max |A|`.
pub const MAX_LINEAR_PHASE: f64 = 50.0;
/// `|u|_inf` beyond which a run counts as blown up.
pub const BLOWUP_LINF: f64 = 1e6;

#[derive(Clone, Copy, Debug)]
pub struct EvolveConfig<T> {
    /// Requested step; negative values integrate backwards in time.
    pub dt: T,
    /// Final time, same sign as `dt`.
    pub t_final: T,
    /// Write a snapshot every this many steps (the initial state included);
    /// `0` disables snapshots.
    pub snapshot_stride: usize,
    /// Log conservation quantities every this many steps.
    pub monitor_stride: usize,
    /// Apply the 2/3 mask to the nonlinear term and to the initial datum.
    pub dealias: bool,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self { dt, t_final, snapshot_stride: 0, monitor_stride: 1, dealias: true }
    }

    /// Number of steps and the step actually taken, `t_final / steps`.
    pub fn schedule(&self) -> Result<(usize, T)> {
        let (dt, t) = (self.dt, self.t_final);
        if !(dt.is_finite() && t.is_finite()) || dt == T::zero() {
            return Err(Error::InvalidParams("dt must be finite and nonzero".into()));
        }
        let ratio = t / dt;
        if !(ratio >= T::one() - lit(1e-9)) {
            return Err(Error::InvalidParams(format!("need |T| >= |dt| with matching signs, got T = {t}, dt = {dt}")));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidParams("monitor stride must be positive".into()));
        }
        let steps = to_f64(ratio - lit(1e-9)).ceil().max(1.0) as usize;
        Ok((steps, t / lit(steps as f64)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationRow<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub linf: T,
    pub grad_l2: T,
}

#[derive(Clone, Debug, Default)]
pub struct ConservationLog<T> {
    pub rows: Vec<ConservationRow<T>>,
}

impl<T: Real> ConservationLog<T> {
    /// `max |M(t) - M(0)| / M(0)`.
    pub fn mass_drift(&self) -> T {
        self.drift(|r| r.mass)
    }

    /// `max |E(t) - E(0)| / max(|E(0)|, 1e-300)`.
    pub fn energy_drift(&self) -> T {
        self.drift(|r| r.energy)
    }

    /// Largest `|E(t) - E(0)|`.
    pub fn energy_drift_abs(&self) -> T {
        let Some(first) = self.rows.first() else { return T::zero() };
        self.rows.iter().map(|r| (r.energy - first.energy).abs()).fold(T::zero(), T::max)
    }

    fn drift(&self, f: impl Fn(&ConservationRow<T>) -> T) -> T {
        let Some(first) = self.rows.first() else { return T::zero() };
        let base = f(first).abs().max(T::min_positive_value());
        self.rows.iter().map(|r| (f(r) - f(first)).abs() / base).fold(T::zero(), T::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,M,E,linf,grad_l2\n");
        for r in &self.rows {
            out.push_str(&csv_row([real17(r.t), real17(r.mass), real17(r.energy), real17(r.linf), real17(r.grad_l2)]));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOutcome<T: Real> {
    /// Final state, or the last finite state when the run blew up.
    pub field: Field<T>,
    /// Time of `field`.
    pub t: T,
    pub steps: usize,
    pub dt: T,
    pub log: ConservationLog<T>,
    pub blowup: bool,
}

/// One Lawson-RK4 integrator bound to a grid and model parameters.
#[derive(Clone, Debug)]
pub struct Evolver<T: Real> {
    grid: Arc<Grid<T>>,
    p: T,
    beta: T,
    /// `-|kappa|^2 / (1 + beta |kappa_y|^2)`
    a: Vec<T>,
    /// `1 / (1 + beta |kappa_y|^2)`, zeroed outside the dealiasing mask.
    nl: Vec<T>,
    mask: Vec<bool>,
}

impl<T: Real> Evolver<T> {
    pub fn new(grid: &Arc<Grid<T>>, p: T, beta: T, dealias: bool) -> Result<Self> {
        if !(p > T::zero() && beta > T::zero()) {
            return Err(Error::InvalidParams("p and beta must be positive".into()));
        }
        let spec = grid.spec();
        let mask: Vec<bool> = (0..grid.len())
            .map(|flat| {
                if !dealias {
                    return true;
                }
                let idx = spec.unravel(flat);
                (0..spec.d()).all(|j| {
                    let n = spec.dims()[j] as i64;
                    3 * spec.frequency_index(j, idx[j]).abs() < n
                })
            })
            .collect();
        let mut a = Vec::with_capacity(grid.len());
        let mut nl = Vec::with_capacity(grid.len());
        for ((&k2, &ky2), &keep) in grid.k_squared().iter().zip(grid.ky_squared()).zip(&mask) {
            let inv = T::one() / (T::one() + beta * ky2);
            a.push(-k2 * inv);
            nl.push(if keep { inv } else { T::zero() });
        }
        Ok(Self { grid: grid.clone(), p, beta, a, nl, mask })
    }

    pub fn max_linear_rate(&self) -> T {
        self.a.iter().map(|x| x.abs()).fold(T::zero(), T::max)
    }

    /// Zeroes the Fourier modes outside the dealiasing mask.
    pub fn project(&self, u: &Field<T>) -> Field<T> {
        let mut out = u.clone();
        self.grid.forward(out.values_mut());
        for (z, &keep) in out.values_mut().iter_mut().zip(&self.mask) {
            if !keep {
                *z = Complex::new(T::zero(), T::zero());
            }
        }
        self.grid.inverse(out.values_mut());
        out
    }

    fn nonlinear(&self, hat: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut u = hat.to_vec();
        self.grid.inverse(&mut u);
        let half_p = self.p / lit(2.0);
        for z in u.iter_mut() {
            *z = *z * z.norm_sqr().powf(half_p);
        }
        self.grid.forward(&mut u);
        let i = Complex::new(T::zero(), T::one());
        u.iter().zip(&self.nl).map(|(z, &w)| i * *z * w).collect()
    }

    fn phases(&self, dt: T) -> Vec<Complex<T>> {
        let half = dt / lit(2.0);
        self.a.iter().map(|&a| Complex::from_polar(T::one(), a * half)).collect()
    }

    /// Advances `u` by `dt` (either sign).
    pub fn step(&self, u: &Field<T>, dt: T) -> Result<Field<T>> {
        if u.grid().spec() != self.grid.spec() {
            return Err(Error::GridMismatch);
        }
        if !(to_f64(dt.abs() * self.max_linear_rate()) <= MAX_LINEAR_PHASE) {
            return Err(Error::InvalidParams(format!(
                "dt = {dt} too large: |dt| max|A| = {} exceeds {MAX_LINEAR_PHASE}",
                dt.abs() * self.max_linear_rate()
            )));
        }
        let e = self.phases(dt);
        let mut hat = u.values().to_vec();
        self.grid.forward(&mut hat);
        self.rk4(&mut hat, dt, &e);
        self.grid.inverse(&mut hat);
        Field::from_values(&self.grid, hat)
    }

    fn rk4(&self, hat: &mut [Complex<T>], dt: T, e: &[Complex<T>]) {
        let half = dt / lit(2.0);
        let sixth = dt / lit(6.0);
        let two = lit::<T>(2.0);
        let k1 = self.nonlinear(hat);
        let s2: Vec<_> = hat.iter().zip(&k1).zip(e).map(|((&u, &k), &e)| e * (u + k * half)).collect();
        let k2 = self.nonlinear(&s2);
        let eu: Vec<_> = hat.iter().zip(e).map(|(&u, &e)| e * u).collect();
        let s3: Vec<_> = eu.iter().zip(&k2).map(|(&u, &k)| u + k * half).collect();
        let k3 = self.nonlinear(&s3);
        let s4: Vec<_> = eu.iter().zip(&k3).zip(e).map(|((&u, &k), &e)| e * u + e * k * dt).collect();
        let k4 = self.nonlinear(&s4);
        for i in 0..hat.len() {
            let e1 = e[i];
            let e2 = e1 * e1;
            hat[i] = e2 * hat[i] + (e2 * k1[i] + e1 * (k2[i] + k3[i]) * two + k4[i]) * sixth;
        }
    }

    fn monitor(&self, u: &Field<T>, t: T) -> ConservationRow<T> {
        let (gx, gy) = gradient_norms_sq(u);
        ConservationRow { t, mass: mass(u, self.beta), energy: energy(u, self.p), linf: u.max_abs(), grad_l2: (gx + gy).sqrt() }
    }

    /// Integrates from `u0` to `config.t_final`, calling `on_snapshot(index,
    /// t, u)` every `snapshot_stride` steps.
    pub fn evolve_with(
        &self,
        u0: &Field<T>,
        config: &EvolveConfig<T>,
        mut on_snapshot: impl FnMut(usize, T, &Field<T>) -> Result<()>,
    ) -> Result<EvolveOutcome<T>> {
        let (steps, dt) = config.schedule()?;
        if u0.grid().spec() != self.grid.spec() {
            return Err(Error::GridMismatch);
        }
        if !u0.is_finite() {
            return Err(Error::NonFinite("initial datum"));
        }
        if !(to_f64(dt.abs() * self.max_linear_rate()) <= MAX_LINEAR_PHASE) {
            return Err(Error::InvalidParams(format!("dt = {dt} violates |dt| max|A| <= {MAX_LINEAR_PHASE}")));
        }
        let e = self.phases(dt);
        let mut u = if config.dealias { self.project(u0) } else { u0.clone() };
        let mut log = ConservationLog { rows: vec![self.monitor(&u, T::zero())] };
        let mut snaps = 0;
        if config.snapshot_stride > 0 {
            on_snapshot(snaps, T::zero(), &u)?;
            snaps += 1;
        }
        let mut hat = u.values().to_vec();
        self.grid.forward(&mut hat);
        let limit = lit::<T>(BLOWUP_LINF);
        for n in 1..=steps {
            self.rk4(&mut hat, dt, &e);
            let mut next = hat.clone();
            self.grid.inverse(&mut next);
            let next = Field::from_values(&self.grid, next)?;
            let t = dt * lit(n as f64);
            let linf = next.max_abs();
            if !(next.is_finite() && linf <= limit) {
                let t_last = dt * lit((n - 1) as f64);
                return Ok(EvolveOutcome { field: u, t: t_last, steps: n - 1, dt, log, blowup: true });
            }
            u = next;
            if n % config.monitor_stride == 0 || n == steps {
                log.rows.push(self.monitor(&u, t));
            }
            if config.snapshot_stride > 0 && n % config.snapshot_stride == 0 {
                on_snapshot(snaps, t, &u)?;
                snaps += 1;
            }
        }
        Ok(EvolveOutcome { field: u, t: config.t_final, steps, dt, log, blowup: false })
    }

    pub fn evolve(&self, u0: &Field<T>, config: &EvolveConfig<T>) -> Result<EvolveOutcome<T>> {
        self.evolve_with(u0, config, |_, _, _| Ok(()))
    }
}

/// Snapshot file name for index `i`.
pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:06}.rnls")
}

/// Convenience wrapper building an [`Evolver`] for one run.
pub fn evolve<T: Real>(u0: &Field<T>, config: &EvolveConfig<T>, p: T, beta: T) -> Result<EvolveOutcome<T>> {
    Evolver::new(u0.grid(), p, beta, config.dealias)?.evolve(u0, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn constant_state_rotates() {
        let g = Grid::new(GridSpec::cubic(1, 0, 16, 10.0).unwrap());
        let u0 = Field::from_real_fn(&g, |_| 1.0f64);
        let out = evolve(&u0, &EvolveConfig::new(1e-3, 1.0), 2.0, 1.0).unwrap();
        let expect = Complex::from_polar(1.0, 1.0);
        for z in out.field.values() {
            assert!((z - expect).norm() < 1e-11, "{z} vs {expect}");
        }
    }

    #[test]
    fn schedule_rounds_to_whole_steps() {
        let c = EvolveConfig::new(0.3f64, 1.0);
        let (n, dt) = c.schedule().unwrap();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(EvolveConfig::new(-0.1f64, -1.0).schedule().unwrap().0, 10);
        assert!(EvolveConfig::new(0.1f64, -1.0).schedule().is_err());
        assert!(EvolveConfig::new(0.0f64, 1.0).schedule().is_err());
    }

    #[test]
    fn dealias_mask_removes_upper_third() {
        let g = Grid::new(GridSpec::cubic(1, 0, 12, 12.0).unwrap());
        let ev = Evolver::new(&g, 2.0f64, 1.0, true).unwrap();
        let kept = ev.mask.iter().filter(|&&k| k).count();
        assert_eq!(kept, 7);
        let full = Evolver::new(&g, 2.0f64, 1.0, false).unwrap();
        assert!(full.mask.iter().all(|&k| k));
    }

    #[test]
    fn stiff_step_is_rejected() {
        let g = Grid::new(GridSpec::cubic(1, 0, 256, 1.0).unwrap());
        let ev = Evolver::new(&g, 2.0f64, 1.0, true).unwrap();
        let u = Field::from_real_fn(&g, |_| 1.0);
        assert!(ev.step(&u, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(GridSpec::cubic(1, 0, 16, 10.0).unwrap());
        let u0 = Field::from_real_fn(&g, |x: &[f64; 3]| (-x[0] * x[0]).exp());
        let out = evolve(&u0, &EvolveConfig { monitor_stride: 2, ..EvolveConfig::new(0.1, 0.5) }, 2.0, 1.0).unwrap();
        let csv = out.log.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,M,E,linf,grad_l2");
        assert_eq!(lines.len(), 1 + 4);
        assert!(out.log.rows.windows(2).all(|w| w[1].t > w[0].t));
    }
}
