//! Explicit formulas: critical exponents, the one-dimensional `sech` profile,
//! the bound-state scaling map, mass curves and the regime classifier.

mod explicit;
mod gamma;
mod mass;
mod profile;
mod regime;

pub use explicit::{c_p, me_explicit_d1k1, omega_thresholds, ExplicitMassEnergy};
pub use gamma::gamma;
pub use mass::{MassCurve, QNorms};
pub use profile::{auto_box_lengths, default_points, phi_profile, ProfileSource, DECAY_LIMIT};
pub use regime::{classify_regime, classify_regime_with, InfimumVerdict, Regime, RegimeReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Physical parameters of one model instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub d: usize,
    pub k: usize,
    pub p: T,
    pub beta: T,
    pub omega: Option<T>,
    pub mass: Option<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(d: usize, k: usize, p: T, beta: T) -> Result<Self> {
        let params = Self { d, k, p, beta, omega: None, mass: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_omega(mut self, omega: T) -> Result<Self> {
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn with_mass(mut self, m: T) -> Result<Self> {
        if !(m > T::zero() && m.is_finite()) {
            return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
        }
        self.mass = Some(m);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > crate::grid::MAX_DIM {
            return Err(Error::InvalidParams(format!("dimension {} outside 1..=3", self.d)));
        }
        if self.k > self.d {
            return Err(Error::InvalidParams(format!("k = {} exceeds d = {}", self.k, self.d)));
        }
        if !(self.p > T::zero() && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be positive, got {}", self.p)));
        }
        if !(self.beta > T::zero() && self.beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// Requires `0 < p < p_c(d)`, the range where `Q_{d,p}` exists.
    pub fn require_energy_subcritical(&self) -> Result<()> {
        if self.p >= p_critical::<T>(self.d) {
            return Err(Error::InvalidParams(format!(
                "p = {} is not below the critical exponent p_c({}) = {}",
                self.p,
                self.d,
                p_critical::<T>(self.d)
            )));
        }
        Ok(())
    }

    pub fn omega(&self) -> Result<T> {
        self.omega.ok_or_else(|| Error::InvalidParams("omega is required".into()))
    }

    pub fn mass(&self) -> Result<T> {
        self.mass.ok_or_else(|| Error::InvalidParams("mass m is required".into()))
    }

    /// `a = (4 - p d) / (2 p)`.
    pub fn exponent_a(&self) -> T {
        (lit::<T>(4.0) - self.p * from_usize(self.d)) / (lit::<T>(2.0) * self.p)
    }

    /// `b = (k - 2) / 2`.
    pub fn exponent_b(&self) -> T {
        (from_usize::<T>(self.k) - lit(2.0)) / lit(2.0)
    }

    /// The mass-critical exponent `4 / d`.
    pub fn p_mass_critical(&self) -> T {
        lit::<T>(4.0) / from_usize(self.d)
    }
}

/// `p_c(d)`: infinite for `d = 1, 2` and `4 / (d - 2)` otherwise.
pub fn p_critical<T: Real>(d: usize) -> T {
    if d <= 2 {
        T::infinity()
    } else {
        lit::<T>(4.0) / from_usize(d - 2)
    }
}

/// `ln sech(z)` without overflow for large `|z|`.
pub(crate) fn ln_sech<T: Real>(z: T) -> T {
    let a = z.abs();
    T::LN_2() - a - (lit::<T>(-2.0) * a).exp().ln_1p()
}

/// The positive even solution of `-Q'' + Q = Q^{p+1}` on the line:
/// `Q(x) = ((p+2)/2)^{1/p} sech^{2/p}(p x / 2)`.
pub fn q_exact_1d<T: Real>(p: T, x: T) -> T {
    let two = lit::<T>(2.0);
    (((p + two) / two).ln() / p + two / p * ln_sech(p * x / two)).exp()
}

/// `Q'(x) = -Q(x) tanh(p x / 2)`.
pub fn q_exact_1d_derivative<T: Real>(p: T, x: T) -> T {
    -q_exact_1d(p, x) * (p * x / lit(2.0)).tanh()
}
