//! Radial ground state `Q_{d,p}` by shooting on `Q(0)`.
//!
//! The radial equation `Q'' + (d-1) Q' / r - Q + |Q|^p Q = 0` is integrated
//! with classical RK4 from a series start at `r = h`. Bisection on `a = Q(0)`
//! separates trajectories that cross zero (`a` too large) from trajectories
//! that turn upward while still positive (`a` too small). Past the radius
//! where the bisected trajectory can no longer be trusted, the table is
//! continued by the decaying solution of the linearized equation,
//! `r^{-nu} K_nu(r)` with `nu = (d-2)/2`.

use serde::Serialize;

use crate::closed_forms::p_critical;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions<T> {
    /// RK4 step `h_r`.
    pub step: T,
    pub r_max: T,
    /// Bisection stops once the amplitude bracket is narrower than this.
    pub tol: T,
    /// The integrated trajectory is kept until `Q` falls below this fraction
    /// of `Q(0)`; the asymptotic tail takes over afterwards.
    pub tail_threshold: T,
}

impl<T: Real> Default for ShootingOptions<T> {
    fn default() -> Self {
        Self { step: lit(1e-3), r_max: lit(30.0), tol: lit(1e-12), tail_threshold: lit(1e-4) }
    }
}

/// Tabulated radial profile with slopes for Hermite interpolation.
#[derive(Clone, Debug, Serialize)]
pub struct RadialProfile<T> {
    pub d: usize,
    pub p: T,
    pub step: T,
    /// `Q(0)` found by bisection.
    pub amplitude: T,
    /// `Q(r_max)`.
    pub decay: T,
    /// Radius where the asymptotic tail replaces the integrated trajectory.
    pub tail_start: T,
    #[serde(skip)]
    values: Vec<T>,
    #[serde(skip)]
    slopes: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// `Q` reached zero: amplitude too large.
    Over,
    /// `Q'` became positive with `Q > 0`: amplitude too small.
    Under,
}

struct Integrator<T> {
    d: usize,
    p: T,
    h: T,
    steps: usize,
}

impl<T: Real> Integrator<T> {
    fn rhs(&self, r: T, q: T, s: T) -> (T, T) {
        let nonlinear = q.abs().powf(self.p) * q;
        (s, -from_usize::<T>(self.d - 1) / r * s + q - nonlinear)
    }

    /// Value and slope at `r = h` from the Taylor start `a + c r^2`.
    fn start(&self, a: T) -> (T, T) {
        let c = (a - a.powf(self.p + T::one())) / (lit::<T>(2.0) * from_usize(self.d));
        (a + c * self.h * self.h, lit::<T>(2.0) * c * self.h)
    }

    fn rk4(&self, r: T, q: T, s: T) -> (T, T) {
        let h = self.h;
        let half = lit::<T>(0.5);
        let (k1q, k1s) = self.rhs(r, q, s);
        let (k2q, k2s) = self.rhs(r + half * h, q + half * h * k1q, s + half * h * k1s);
        let (k3q, k3s) = self.rhs(r + half * h, q + half * h * k2q, s + half * h * k2s);
        let (k4q, k4s) = self.rhs(r + h, q + h * k3q, s + h * k3s);
        let sixth = h / lit(6.0);
        (
            q + sixth * (k1q + lit::<T>(2.0) * (k2q + k3q) + k4q),
            s + sixth * (k1s + lit::<T>(2.0) * (k2s + k3s) + k4s),
        )
    }

    /// Classifies a shot; `None` means it survived to `r_max` without event.
    fn shoot(&self, a: T) -> Option<Shot> {
        let (mut q, mut s) = self.start(a);
        for i in 1..self.steps {
            if q <= T::zero() {
                return Some(Shot::Over);
            }
            if s > T::zero() {
                return Some(Shot::Under);
            }
            (q, s) = self.rk4(from_usize::<T>(i) * self.h, q, s);
        }
        None
    }

    /// Records `(Q, Q')` for indices `0..=steps` until the stopping rule fires;
    /// returns the tables and the last trusted index.
    fn trajectory(&self, a: T, threshold: T) -> (Vec<T>, Vec<T>, usize) {
        let mut values = vec![a];
        let mut slopes = vec![T::zero()];
        let (mut q, mut s) = self.start(a);
        let floor = threshold * a;
        for i in 1..=self.steps {
            if q <= floor || s >= T::zero() || q <= T::zero() {
                break;
            }
            values.push(q);
            slopes.push(s);
            (q, s) = self.rk4(from_usize::<T>(i) * self.h, q, s);
        }
        let last = values.len() - 1;
        (values, slopes, last)
    }
}

/// Decaying solution of `g'' + (d-1) g' / r - g = 0` and its derivative,
/// from the asymptotic series of `K_nu`, `nu = (d-2)/2`. The series
/// terminates for odd `d`.
pub(crate) fn decaying_mode<T: Real>(d: usize, r: T) -> (T, T) {
    let nu = (from_usize::<T>(d) - lit(2.0)) / lit(2.0);
    let four_nu_sq = lit::<T>(4.0) * nu * nu;
    let mut coef = T::one();
    let (mut sum, mut dsum) = (T::one(), T::zero());
    let mut last = T::infinity();
    for j in 1..40usize {
        let odd = from_usize::<T>(2 * j - 1);
        coef = coef * (four_nu_sq - odd * odd) / (from_usize::<T>(j) * lit(8.0));
        let term = coef / r.powi(j as i32);
        if term == T::zero() || term.abs() >= last {
            break;
        }
        last = term.abs();
        sum = sum + term;
        dsum = dsum - from_usize::<T>(j) * term / r;
        if last < lit(1e-17) {
            break;
        }
    }
    let half_d1 = (from_usize::<T>(d) - T::one()) / lit(2.0);
    let envelope = (-r).exp() * r.powf(-half_d1);
    let g = envelope * sum;
    let dg = envelope * (dsum - sum * (T::one() + half_d1 / r));
    (g, dg)
}

/// Computes `Q_{d,p}` for `d` in 1..=3 and `0 < p < p_c(d)`.
pub fn shoot_radial<T: Real>(d: usize, p: T, opts: &ShootingOptions<T>) -> Result<RadialProfile<T>> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParams(format!("radial shooting supports d = 1..=3, got {d}")));
    }
    if !(p > T::zero() && p < p_critical::<T>(d)) {
        return Err(Error::InvalidParams(format!("p = {p} must lie in (0, p_c({d}))")));
    }
    let steps = (opts.r_max / opts.step).round().to_usize().unwrap_or(0);
    if steps < 16 {
        return Err(Error::InvalidParams("r_max / step must allow at least 16 steps".into()));
    }
    let integ = Integrator { d, p, h: opts.step, steps };

    let two = lit::<T>(2.0);
    let mut lo = T::one();
    let mut hi = lit::<T>(10.0) * ((p + two) / two).powf(T::one() / p);
    let bad_bracket = || Error::BracketNotFound { d, p: p.to_f64().unwrap_or(f64::NAN) };
    if integ.shoot(lo) == Some(Shot::Over) || integ.shoot(hi) != Some(Shot::Over) {
        return Err(bad_bracket());
    }
    while hi - lo > opts.tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        match integ.shoot(mid) {
            Some(Shot::Over) => hi = mid,
            _ => lo = mid,
        }
    }
    let amplitude = (lo + hi) / two;

    let (mut values, mut slopes, last) = integ.trajectory(amplitude, opts.tail_threshold);
    if last < 2 {
        return Err(bad_bracket());
    }
    let r0 = from_usize::<T>(last) * opts.step;
    let (g0, _) = decaying_mode::<T>(d, r0);
    let scale = values[last] / g0;
    for i in last + 1..=steps {
        let (g, dg) = decaying_mode::<T>(d, from_usize::<T>(i) * opts.step);
        values.push(scale * g);
        slopes.push(scale * dg);
    }
    let decay = values[steps];
    Ok(RadialProfile { d, p, step: opts.step, amplitude, decay, tail_start: r0, values, slopes })
}

impl<T: Real> RadialProfile<T> {
    pub fn r_max(&self) -> T {
        from_usize::<T>(self.values.len() - 1) * self.step
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn radius(&self, i: usize) -> T {
        from_usize::<T>(i) * self.step
    }

    /// `Q(r)` by cubic Hermite interpolation; beyond the table the decaying
    /// linear mode is used.
    pub fn value(&self, r: T) -> T {
        self.eval(r).0
    }

    pub fn slope(&self, r: T) -> T {
        let (_, s) = self.eval(r.abs());
        if r < T::zero() {
            -s
        } else {
            s
        }
    }

    fn eval(&self, r: T) -> (T, T) {
        let r = r.abs();
        let n = self.values.len() - 1;
        let x = r / self.step;
        let i = x.floor().to_usize().unwrap_or(usize::MAX);
        if i >= n {
            let r_end = self.r_max();
            let (g_end, _) = decaying_mode::<T>(self.d, r_end);
            let (g, dg) = decaying_mode::<T>(self.d, r);
            let scale = self.values[n] / g_end;
            return (scale * g, scale * dg);
        }
        let t = x - from_usize(i);
        let h = self.step;
        let (q0, q1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let (two, three) = (lit::<T>(2.0), lit::<T>(3.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let value = h00 * q0 + h10 * m0 + h01 * q1 + h11 * m1;
        let six = lit::<T>(6.0);
        let d00 = six * t2 - six * t;
        let d10 = three * t2 - lit::<T>(4.0) * t + T::one();
        let d01 = -d00;
        let d11 = three * t2 - two * t;
        let slope = (d00 * q0 + d10 * m0 + d01 * q1 + d11 * m1) / h;
        (value, slope)
    }

    /// `int_{R^d} f(Q, Q') dx` for a radial integrand, by composite Simpson
    /// over the table.
    pub fn radial_integral(&self, f: impl Fn(T, T) -> T) -> T {
        let n = self.values.len() - 1;
        let n_even = n - n % 2;
        let weight = |i: usize| -> T {
            let r = self.radius(i);
            f(self.values[i], self.slopes[i]) * r.powi(self.d as i32 - 1)
        };
        let mut acc = weight(0) + weight(n_even);
        for i in 1..n_even {
            let c = if i % 2 == 1 { lit::<T>(4.0) } else { lit::<T>(2.0) };
            acc = acc + c * weight(i);
        }
        let surface = match self.d {
            1 => lit::<T>(2.0),
            2 => T::TAU(),
            _ => lit::<T>(4.0) * T::PI(),
        };
        surface * acc * self.step / lit(3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::q_exact_1d;

    #[test]
    fn one_dimensional_profiles_match_closed_form() {
        let opts = ShootingOptions::default();
        for p in [2.0, 6.0] {
            let prof = shoot_radial::<f64>(1, p, &opts).unwrap();
            let exact_peak = ((p + 2.0) / 2.0).powf(1.0 / p);
            assert!((prof.amplitude - exact_peak).abs() < 1e-8, "p={p}: {}", prof.amplitude);
            let sup = prof
                .values()
                .iter()
                .enumerate()
                .map(|(i, &q)| (q - q_exact_1d(p, prof.radius(i))).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 1e-6, "p={p}: sup error {sup}");
        }
        let p6 = shoot_radial::<f64>(1, 6.0, &opts).unwrap();
        assert!((p6.amplitude - 1.2599).abs() < 1e-4);
    }

    #[test]
    fn profile_is_positive_and_decreasing() {
        let prof = shoot_radial::<f64>(2, 2.0, &ShootingOptions::default()).unwrap();
        let v = prof.values();
        assert!(v.iter().all(|&q| q > 0.0));
        assert!(v.windows(2).skip(1).all(|w| w[1] < w[0]));
        assert!(prof.decay < 1e-10 * prof.amplitude);
        // Known amplitude of the two-dimensional cubic ground state.
        assert!((prof.amplitude - 2.206_200_8).abs() < 1e-6, "{}", prof.amplitude);
    }

    #[test]
    fn decaying_mode_solves_linear_equation() {
        for d in 1..=3 {
            let r = 12.0;
            let h = 1e-3;
            let (g, dg) = decaying_mode::<f64>(d, r);
            let (gp, _) = decaying_mode::<f64>(d, r + h);
            let (gm, _) = decaying_mode::<f64>(d, r - h);
            let g2 = (gp - 2.0 * g + gm) / (h * h);
            let res = g2 + (d as f64 - 1.0) / r * dg - g;
            assert!(res.abs() < 1e-6 * g.abs(), "d={d} residual {}", res / g);
            assert!(((gp - gm) / (2.0 * h) - dg).abs() < 1e-6 * dg.abs());
        }
    }

    #[test]
    fn interpolation_reproduces_closed_form_between_nodes() {
        let prof = shoot_radial::<f64>(1, 2.0, &ShootingOptions::default()).unwrap();
        for r in [0.00037, 0.5005, 3.1, 17.77, 31.0] {
            let err = (prof.value(r) - q_exact_1d(2.0, r)).abs();
            assert!(err < 1e-7, "r={r} err={err}");
        }
    }

    #[test]
    fn rejects_supercritical_and_bad_dimension() {
        let opts = ShootingOptions::default();
        assert!(shoot_radial::<f64>(3, 4.0, &opts).is_err());
        assert!(shoot_radial::<f64>(4, 1.0, &opts).is_err());
        assert!(shoot_radial::<f64>(1, -1.0, &opts).is_err());
    }
}
