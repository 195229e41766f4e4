//! The mass curve `m(omega) = M(phi_omega)` and its slope.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_state::{shoot_radial, RadialProfile, ShootingOptions};
use crate::scalar::{from_usize, lit, Real};

use super::ModelParams;

/// Integrals of `Q_{d,p}` over `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QNorms<T> {
    pub d: usize,
    pub p: T,
    /// `|Q|_2^2`
    pub l2_sq: T,
    /// `|grad Q|_2^2`
    pub grad_sq: T,
    /// `int Q^{p+2}`
    pub lp_pow: T,
}

impl<T: Real> QNorms<T> {
    /// Closed-form integrals of the `sech` profile.
    pub fn exact_1d(p: T) -> Self {
        let two = lit::<T>(2.0);
        let four = lit::<T>(4.0);
        let l2_sq = ((p + two) / two).powf(two / p) * (two / p) * super::c_p(p);
        let grad_sq = l2_sq * p / (p + four);
        Self { d: 1, p, l2_sq, grad_sq, lp_pow: l2_sq + grad_sq }
    }

    pub fn from_radial(profile: &RadialProfile<T>) -> Self {
        let p = profile.p;
        Self {
            d: profile.d,
            p,
            l2_sq: profile.radial_integral(|q, _| q * q),
            grad_sq: profile.radial_integral(|_, s| s * s),
            lp_pow: profile.radial_integral(|q, _| q.abs().powf(p + lit(2.0))),
        }
    }

    /// Exact for `d = 1`, shooting with default options otherwise.
    pub fn compute(d: usize, p: T) -> Result<Self> {
        if d == 1 {
            if !(p > T::zero()) {
                return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
            }
            return Ok(Self::exact_1d(p));
        }
        Ok(Self::from_radial(&shoot_radial(d, p, &ShootingOptions::default())?))
    }

    /// `|grad_y Q|_2^2 = (k/d) |grad Q|_2^2` for radial `Q`.
    pub fn grad_y_sq(&self, k: usize) -> T {
        self.grad_sq * from_usize(k) / from_usize(self.d)
    }
}

/// `m(omega) = f(beta omega)`, `f(x) = x^a (1 + x)^b (A + B x)`.
#[derive(Clone, Debug, Serialize)]
pub struct MassCurve<T> {
    pub d: usize,
    pub k: usize,
    pub p: T,
    pub beta: T,
    pub norms: QNorms<T>,
    pub a: T,
    pub b: T,
    #[serde(rename = "A")]
    pub coef_a: T,
    #[serde(rename = "B")]
    pub coef_b: T,
    pub c0: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> MassCurve<T> {
    pub fn new(params: &ModelParams<T>, norms: QNorms<T>) -> Result<Self> {
        params.validate()?;
        params.require_energy_subcritical()?;
        if norms.d != params.d || norms.p != params.p {
            return Err(Error::InvalidParams("norms were computed for a different (d, p)".into()));
        }
        let a = params.exponent_a();
        let b = params.exponent_b();
        let half = lit::<T>(0.5);
        let scale = half * params.beta.powf(-a);
        let coef_a = scale * norms.l2_sq;
        let coef_b = coef_a + scale * norms.grad_y_sq(params.k);
        Ok(Self {
            d: params.d,
            k: params.k,
            p: params.p,
            beta: params.beta,
            norms,
            a,
            b,
            coef_a,
            coef_b,
            c0: a * coef_a,
            c1: a * (coef_a + coef_b) + b * coef_a + coef_b,
            c2: (a + b + T::one()) * coef_b,
        })
    }

    /// Builds the curve with [`QNorms::compute`].
    pub fn for_params(params: &ModelParams<T>) -> Result<Self> {
        params.validate()?;
        params.require_energy_subcritical()?;
        Self::new(params, QNorms::compute(params.d, params.p)?)
    }

    fn check_omega(omega: T) -> Result<()> {
        if omega > T::zero() && omega.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("omega must be positive, got {omega}")))
        }
    }

    pub fn f(&self, x: T) -> T {
        x.powf(self.a) * (T::one() + x).powf(self.b) * (self.coef_a + self.coef_b * x)
    }

    pub fn f_prime(&self, x: T) -> T {
        x.powf(self.a - T::one()) * (T::one() + x).powf(self.b - T::one()) * (self.c0 + (self.c1 + self.c2 * x) * x)
    }

    pub fn mass(&self, omega: T) -> Result<T> {
        Self::check_omega(omega)?;
        Ok(self.f(self.beta * omega))
    }

    /// `m'(omega) = beta f'(beta omega)`.
    pub fn mass_prime(&self, omega: T) -> Result<T> {
        Self::check_omega(omega)?;
        Ok(self.beta * self.f_prime(self.beta * omega))
    }

    /// Central difference with step `omega * 1e-5`.
    pub fn mass_prime_fd(&self, omega: T) -> Result<T> {
        Self::check_omega(omega)?;
        let h = omega * lit(1e-5);
        Ok((self.f(self.beta * (omega + h)) - self.f(self.beta * (omega - h))) / (lit::<T>(2.0) * h))
    }

    /// `E(phi_omega)` from the scaling of the three integrals of `Q`.
    pub fn energy(&self, omega: T) -> Result<T> {
        Self::check_omega(omega)?;
        let one = T::one();
        let two = lit::<T>(2.0);
        let d = from_usize::<T>(self.d);
        let k = from_usize::<T>(self.k);
        let stretch = one + self.beta * omega;
        let jac = omega.powf(two / self.p - d / two) * stretch.powf(k / two);
        let grad_x = jac * omega * (d - k) / d * self.norms.grad_sq;
        let grad_y = jac * omega / stretch * k / d * self.norms.grad_sq;
        let pot = jac * omega * self.norms.lp_pow;
        Ok((grad_x + grad_y) / two - pot / (self.p + two))
    }

    /// Positive root of `c0 + c1 x + c2 x^2`, divided by `beta`, when the
    /// quadratic has exactly one root on `(0, inf)`.
    pub fn omega0(&self) -> Option<T> {
        if self.k == 0 {
            return None;
        }
        let (c0, c1, c2) = (self.c0, self.c1, self.c2);
        if !(c0 * c2 < T::zero()) {
            return None;
        }
        let disc = (c1 * c1 - lit::<T>(4.0) * c2 * c0).sqrt();
        // One root per sign; pick the positive one without cancellation.
        let x = if c1 >= T::zero() {
            let q = -(c1 + disc) / lit(2.0);
            if c0 / q > T::zero() {
                c0 / q
            } else {
                q / c2
            }
        } else {
            let q = -(c1 - disc) / lit(2.0);
            if q / c2 > T::zero() {
                q / c2
            } else {
                c0 / q
            }
        };
        Some(x / self.beta)
    }
}
