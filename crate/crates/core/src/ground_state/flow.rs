//! Energy minimization at fixed mass by a mass-normalized Sobolev gradient
//! flow.
//!
//! Each step moves along the `H^1`-preconditioned energy gradient with its
//! component along the preconditioned mass gradient removed, then rescales
//! back onto `M = m`. Removing that component makes the fixed points of the
//! iteration exactly the solutions of `E'(u) + omega M'(u) = 0`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_forms::{classify_regime_with, ModelParams};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{energy, grad_energy, grad_mass, mass};
use crate::grid::Grid;
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{apply_multiplier, inner, l2_norm_sq, InnerWeight, Multiplier};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowOptions<T> {
    /// Initial and maximal step in the preconditioned metric.
    pub tau: T,
    /// Target for `|E'(u) + omega M'(u)|_2 / |u|_2`.
    pub tol: T,
    pub max_iter: usize,
    /// Seed `0` starts from a centered Gaussian; other seeds jitter its
    /// width and center.
    pub seed: u64,
    /// The flow is declared divergent once `E` falls below this value.
    pub divergence_energy: T,
}

impl<T: Real> Default for FlowOptions<T> {
    fn default() -> Self {
        Self { tau: lit(0.5), tol: lit(1e-8), max_iter: 20_000, seed: 0, divergence_energy: lit(-1e6) }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizerResult<T: Real> {
    pub minimizer: Field<T>,
    pub energy: T,
    /// `|M(u) - m|`
    pub mass_residual: T,
    pub omega_hat: T,
    pub el_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// The iterates spread out with `E` near zero instead of localizing.
    pub infimum_not_attained: bool,
    /// Energy after every accepted step.
    pub energy_history: Vec<T>,
    pub seed: u64,
}

/// The JSON written next to a minimizer snapshot.
#[derive(Clone, Debug, Serialize)]
pub struct MinimizerSidecar {
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub m: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub omega_hat: f64,
    pub residual: f64,
    pub mass_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub infimum_not_attained: bool,
    pub seed: u64,
}

impl<T: Real> MinimizerResult<T> {
    pub fn sidecar(&self, params: &ModelParams<T>, m: T) -> MinimizerSidecar {
        MinimizerSidecar {
            d: params.d,
            k: params.k,
            p: to_f64(params.p),
            beta: to_f64(params.beta),
            m: to_f64(m),
            energy: to_f64(self.energy),
            omega_hat: to_f64(self.omega_hat),
            residual: to_f64(self.el_residual),
            mass_residual: to_f64(self.mass_residual),
            iterations: self.iterations,
            converged: self.converged,
            infimum_not_attained: self.infimum_not_attained,
            seed: self.seed,
        }
    }
}

/// `omega_hat = -(E'(u), u)_2 / (2 M(u))`, the multiplier read off the
/// Euler-Lagrange equation.
pub fn estimate_omega<T: Real>(u: &Field<T>, p: T, beta: T) -> Result<T> {
    let m = mass(u, beta);
    if !(m > T::zero()) {
        return Err(Error::InvalidParams("multiplier estimate needs M(u) > 0".into()));
    }
    Ok(-inner(&grad_energy(u, p), u, InnerWeight::L2)? / (lit::<T>(2.0) * m))
}

fn initial_state<T: Real>(grid: &Arc<Grid<T>>, m: T, beta: T, seed: u64) -> Field<T> {
    let spec = grid.spec();
    let d = spec.d();
    let l_min = spec.lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let mut width = l_min / 16.0;
    let mut center = [0.0f64; 3];
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        width *= rng.gen_range(0.7..1.3);
        for c in center.iter_mut().take(d) {
            *c = rng.gen_range(-l_min / 16.0..l_min / 16.0);
        }
    }
    let inv = lit::<T>(1.0 / (2.0 * width * width));
    let u = Field::from_real_fn(grid, |x| {
        let r2 = (0..d).fold(T::zero(), |acc, j| {
            let s = x[j] - lit(center[j]);
            acc + s * s
        });
        (-r2 * inv).exp()
    });
    let s = (m / mass(&u, beta)).sqrt();
    u.scaled(s)
}

/// Minimizes `E` over `M = m` on `grid`.
///
/// Regimes where the infimum is `-inf` for every mass are rejected up
/// front; divergence found during the run is reported as
/// [`Error::Divergence`].
pub fn minimize_im<T: Real>(
    params: &ModelParams<T>,
    grid: &Arc<Grid<T>>,
    m: T,
    opts: &FlowOptions<T>,
) -> Result<MinimizerResult<T>> {
    params.validate()?;
    params.require_energy_subcritical()?;
    if !(m > T::zero()) {
        return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
    }
    if grid.d() != params.d || grid.k() != params.k {
        return Err(Error::InvalidParams("grid does not match (d, k)".into()));
    }
    let regime = classify_regime_with(params, None)?.regime;
    if regime.infimum_unbounded() {
        return Err(Error::RegimeMisuse(format!(
            "regime {regime} has I_m = −∞ for every m > 0 (d={}, k={}, p={}); no minimizer exists",
            params.d, params.k, params.p
        )));
    }

    let (p, beta) = (params.p, params.beta);
    let mut u = initial_state(grid, m, beta, opts.seed);
    let initial_peak = u.max_abs();
    let mut e = energy(&u, p);
    let mut tau = opts.tau;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = T::infinity();
    let mut omega_hat = T::zero();
    let slack = lit::<T>(64.0) * T::epsilon();

    while iterations < opts.max_iter {
        let ge = grad_energy(&u, p);
        let gm = grad_mass(&u, beta)?;
        omega_hat = -inner(&ge, &u, InnerWeight::L2)? / (lit::<T>(2.0) * mass(&u, beta));
        let res = ge.axpy(omega_hat, &gm)?;
        residual = (l2_norm_sq(&res) / l2_norm_sq(&u)).sqrt();
        if !residual.is_finite() {
            return Err(Error::NonFinite("gradient flow"));
        }
        if residual < opts.tol {
            converged = true;
            break;
        }

        let pe = apply_multiplier(&ge, Multiplier::H1WeightInv, T::one())?;
        let pm = apply_multiplier(&gm, Multiplier::H1WeightInv, T::one())?;
        let mu = inner(&ge, &pm, InnerWeight::L2)? / inner(&gm, &pm, InnerWeight::L2)?;
        let dir = pe.axpy(-mu, &pm)?;

        let mut accepted = false;
        for _ in 0..60 {
            let trial = u.axpy(-tau, &dir)?;
            let trial = trial.scaled((m / mass(&trial, beta)).sqrt());
            let e_trial = energy(&trial, p);
            if !e_trial.is_finite() {
                return Err(Error::NonFinite("gradient flow"));
            }
            if e_trial <= e + slack * (e.abs() + T::one()) {
                u = trial;
                e = e_trial;
                accepted = true;
                break;
            }
            tau = tau / lit(2.0);
        }
        iterations += 1;
        history.push(e);
        if e < opts.divergence_energy {
            return Err(Error::Divergence { energy: to_f64(e) });
        }
        if !accepted {
            break;
        }
        tau = (tau * lit(1.5)).min(opts.tau);
    }

    let peak = u.max_abs();
    let edge_ratio = u.boundary_max_abs() / peak;
    let near_zero = e > lit::<T>(-1e-6) * m.max(T::one());
    let spread = edge_ratio > lit(1e-3) || peak < initial_peak / lit(4.0);
    let mass_residual = (mass(&u, beta) - m).abs();
    Ok(MinimizerResult {
        minimizer: u,
        energy: e,
        mass_residual,
        omega_hat,
        el_residual: residual,
        iterations,
        converged,
        infimum_not_attained: near_zero && (spread || !converged),
        energy_history: history,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{auto_box_lengths, phi_profile, ProfileSource};
    use crate::grid::GridSpec;

    #[test]
    fn multiplier_of_exact_profiles() {
        let k0 = ModelParams::new(1, 0, 2.0, 1.0).unwrap().with_omega(1.0).unwrap();
        let g = Grid::new(GridSpec::new(1, 0, &[1024], &auto_box_lengths(&k0, 1.0)).unwrap());
        let phi = phi_profile(&k0, ProfileSource::Exact1d, &g).unwrap();
        assert!((estimate_omega(&phi, 2.0f64, 1.0).unwrap() - 1.0).abs() < 1e-6);
        let twice: f64 = estimate_omega(&phi.scaled(2.0), 2.0, 1.0).unwrap();
        assert!(twice.is_finite() && (twice - 1.0).abs() > 0.1);

        let k1 = ModelParams::new(1, 1, 2.0, 1.0).unwrap().with_omega(5.0).unwrap();
        let g = Grid::new(GridSpec::new(1, 1, &[1024], &auto_box_lengths(&k1, 5.0)).unwrap());
        let phi = phi_profile(&k1, ProfileSource::Exact1d, &g).unwrap();
        assert!((estimate_omega(&phi, 2.0f64, 1.0).unwrap() - 5.0).abs() < 1e-5);
    }

    #[test]
    fn cubic_minimizer_is_the_sech_profile() {
        let params = ModelParams::new(1, 0, 2.0f64, 1.0).unwrap();
        let g = Grid::new(GridSpec::cubic(1, 0, 512, 64.0).unwrap());
        let res = minimize_im(&params, &g, 2.0, &FlowOptions::default()).unwrap();
        assert!(res.converged, "residual {}", res.el_residual);
        assert!((res.energy + 2.0 / 3.0).abs() < 1e-4);
        assert!((res.omega_hat - 1.0).abs() < 1e-6);
        assert!(res.mass_residual < 1e-12 * 2.0);
        assert!(!res.infimum_not_attained);
        assert!(res.energy_history.windows(2).skip(10).all(|w| w[1] <= w[0] + 1e-14));
    }

    #[test]
    fn unbounded_regime_is_rejected() {
        let params = ModelParams::new(1, 0, 6.0, 1.0).unwrap();
        let g = Grid::new(GridSpec::cubic(1, 0, 64, 20.0).unwrap());
        match minimize_im(&params, &g, 1.0, &FlowOptions::default()) {
            Err(Error::RegimeMisuse(msg)) => assert!(msg.contains("I_m = −∞")),
            other => panic!("expected regime misuse, got {other:?}"),
        }
    }

    #[test]
    fn sidecar_fields() {
        let params = ModelParams::new(1, 0, 2.0, 1.0).unwrap();
        let g = Grid::new(GridSpec::cubic(1, 0, 256, 48.0).unwrap());
        let opts = FlowOptions { max_iter: 5, seed: 3, ..FlowOptions::default() };
        let res = minimize_im(&params, &g, 1.0, &opts).unwrap();
        let side = res.sidecar(&params, 1.0);
        assert_eq!(side.seed, 3);
        assert_eq!(side.iterations, 5);
        assert!(!side.converged);
    }
}
