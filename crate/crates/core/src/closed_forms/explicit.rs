//! Explicit mass and energy of the one-dimensional, fully regularized profile.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::gamma;

/// `C_p = Gamma(1/2) Gamma(2/p) / Gamma(2/p + 1/2)`, which equals
/// `int sech^{4/p}`.
pub fn c_p<T: Real>(p: T) -> T {
    let s = lit::<T>(2.0) / p;
    let half = lit::<T>(0.5);
    gamma(half) * gamma(s) / gamma(s + half)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExplicitMassEnergy<T> {
    pub p: T,
    pub beta: T,
    pub omega: T,
    /// `sqrt(omega / (1 + beta omega))`
    pub theta: T,
    /// `M(phi_omega) = (1/2) int (|phi|^2 + beta |phi'|^2)`.
    pub mass: T,
    /// `(phi, P_beta phi)_2`, twice the mass.
    pub pbeta_pairing: T,
    pub energy: T,
}

/// Mass and energy of `phi_omega` for `d = k = 1`.
pub fn me_explicit_d1k1<T: Real>(p: T, beta: T, omega: T) -> Result<ExplicitMassEnergy<T>> {
    for (name, v) in [("p", p), ("beta", beta), ("omega", omega)] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
        }
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let bw = beta * omega;
    let theta = (omega / (one + bw)).sqrt();
    let amp = (omega * (p + two) / two).powf(two / p);
    let cp = c_p(p);
    let pairing = amp * two * cp / (p * theta) * (one + bw * p / ((one + bw) * (four + p)));
    let energy = amp * cp * omega / (p * theta * (four + p)) * (p / (one + bw) - four);
    Ok(ExplicitMassEnergy { p, beta, omega, theta, mass: pairing / two, pbeta_pairing: pairing, energy })
}

/// `(omega_1, omega_2)` for `d = k = 1` and `p > 4`: the minimum of the mass
/// curve and the zero of the energy.
pub fn omega_thresholds<T: Real>(p: T, beta: T) -> Option<(T, T)> {
    let four = lit::<T>(4.0);
    if !(p > four && beta > T::zero()) {
        return None;
    }
    let s = (four + p).sqrt();
    let omega1 = (p - four) * s / ((four * s + lit::<T>(8.0).sqrt() * p) * beta);
    let omega2 = (p - four) / (four * beta);
    Some((omega1, omega2))
}
