//! Which variational regime a parameter set falls into, with the thresholds
//! that delimit it.

use serde::Serialize;

use crate::error::Result;
use crate::scalar::{from_usize, lit, Real};

use super::{omega_thresholds, p_critical, MassCurve, ModelParams, QNorms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p < 4/d`: `I_m` is finite and negative for every mass.
    SubcriticalAllStable,
    /// `k = 0`, `p = 4/d`.
    CriticalK0,
    /// `k = 0`, `p > 4/d`.
    SupercriticalK0,
    /// `k >= 1`, `4/d <= p < min(4/(d-k), p_c)`.
    #[serde(rename = "k_ge_1_band_with_m0")]
    BandWithM0,
    /// `k >= 1`, `p > min(4/(d-k), p_c)`.
    #[serde(rename = "k_ge_1_supercritical")]
    SupercriticalKGe1,
    /// `k >= 1`, `p = min(4/(d-k), p_c)`, which the theory leaves open.
    BoundaryUncovered,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::SubcriticalAllStable => "subcritical_all_stable",
            Regime::CriticalK0 => "critical_k0",
            Regime::SupercriticalK0 => "supercritical_k0",
            Regime::BandWithM0 => "k_ge_1_band_with_m0",
            Regime::SupercriticalKGe1 => "k_ge_1_supercritical",
            Regime::BoundaryUncovered => "boundary_uncovered",
        }
    }

    /// True when `I_m = -inf` for every positive mass.
    pub fn infimum_unbounded(self) -> bool {
        matches!(self, Regime::SupercriticalK0 | Regime::SupercriticalKGe1)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub enum InfimumVerdict {
    NegativeForAll,
    ZeroThenUnbounded,
    UnboundedForAll,
    ZeroThenNegative,
    Unknown,
}

impl InfimumVerdict {
    pub fn describe(self) -> &'static str {
        match self {
            InfimumVerdict::NegativeForAll => "−∞ < I_m < 0 for all m > 0",
            InfimumVerdict::ZeroThenUnbounded => "I_m = 0 for m ≤ m0 and I_m = −∞ for m > m0",
            InfimumVerdict::UnboundedForAll => "I_m = −∞ for all m > 0",
            InfimumVerdict::ZeroThenNegative => "I_m = 0 for m < m0 and −∞ < I_m < 0 for m > m0",
            InfimumVerdict::Unknown => "not covered by the known results",
        }
    }
}

impl From<InfimumVerdict> for String {
    fn from(v: InfimumVerdict) -> Self {
        v.describe().to_owned()
    }
}

/// Sign of `m'(omega)` at one sampled phase speed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeSample<T> {
    pub omega: T,
    pub sign: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport<T> {
    pub d: usize,
    pub k: usize,
    pub p: T,
    pub beta: T,
    pub regime: Regime,
    pub infimum: InfimumVerdict,
    /// `4/d`
    pub p_mass_critical: T,
    /// `min(4/(d-k), p_c(d))` for `k >= 1`; `None` means infinite or `k = 0`.
    pub p_upper: Option<T>,
    /// Root of the slope quadratic divided by `beta` (band regime, `p > 4/d`).
    pub omega0: Option<T>,
    /// `d = k = 1`, `p > 4`: the explicit minimum of the mass curve.
    pub omega1: Option<T>,
    /// `d = k = 1`, `p > 4`: where `E(phi_omega)` vanishes.
    pub omega2: Option<T>,
    /// Critical mass where it is known in closed form.
    pub m0: Option<T>,
    /// `min m(omega)` over `omega > 0`, a lower bound for `m0` in the band.
    pub mass_min: Option<T>,
    /// Log-spaced samples on `[1e-3, 1e3]`; signs only, no global claim.
    pub slope_samples: Vec<SlopeSample<T>>,
}

impl<T: Real> RegimeReport<T> {
    pub fn to_json(&self) -> String {
        crate::output::to_json(self)
    }
}

/// Classifies `params` and computes the thresholds, obtaining `Q_{d,p}`
/// integrals as needed.
pub fn classify_regime<T: Real>(params: &ModelParams<T>) -> Result<RegimeReport<T>> {
    params.validate()?;
    let norms = if params.p < p_critical::<T>(params.d) {
        Some(QNorms::compute(params.d, params.p)?)
    } else {
        None
    };
    classify_regime_with(params, norms)
}

/// As [`classify_regime`] with precomputed norms (`None` skips every
/// threshold that needs the mass curve).
pub fn classify_regime_with<T: Real>(params: &ModelParams<T>, norms: Option<QNorms<T>>) -> Result<RegimeReport<T>> {
    params.validate()?;
    let (d, k, p) = (params.d, params.k, params.p);
    let four = lit::<T>(4.0);
    let p_mass = four / from_usize(d);
    let p_c = p_critical::<T>(d);
    let upper = if k == 0 {
        None
    } else {
        let by_k = if k == d { T::infinity() } else { four / from_usize(d - k) };
        let u = by_k.min(p_c);
        u.is_finite().then_some(u)
    };
    let upper_val = upper.unwrap_or(T::infinity());

    let (regime, infimum) = if p < p_mass {
        (Regime::SubcriticalAllStable, InfimumVerdict::NegativeForAll)
    } else if k == 0 {
        if p == p_mass {
            (Regime::CriticalK0, InfimumVerdict::ZeroThenUnbounded)
        } else {
            (Regime::SupercriticalK0, InfimumVerdict::UnboundedForAll)
        }
    } else if p < upper_val {
        (Regime::BandWithM0, InfimumVerdict::ZeroThenNegative)
    } else if p > upper_val {
        (Regime::SupercriticalKGe1, InfimumVerdict::UnboundedForAll)
    } else {
        (Regime::BoundaryUncovered, InfimumVerdict::Unknown)
    };

    let curve = match norms {
        Some(n) if p < p_c => Some(MassCurve::new(params, n)?),
        _ => None,
    };

    let mut report = RegimeReport {
        d,
        k,
        p,
        beta: params.beta,
        regime,
        infimum,
        p_mass_critical: p_mass,
        p_upper: upper,
        omega0: None,
        omega1: None,
        omega2: None,
        m0: None,
        mass_min: None,
        slope_samples: Vec::new(),
    };

    let Some(curve) = curve else {
        return Ok(report);
    };

    for i in 0..=12 {
        let omega = lit::<T>(10f64.powf(-3.0 + 0.5 * i as f64));
        let slope = curve.mass_prime(omega)?;
        let sign = if slope > T::zero() {
            1
        } else if slope < T::zero() {
            -1
        } else {
            0
        };
        report.slope_samples.push(SlopeSample { omega, sign });
    }

    let tiny = lit::<T>(1e-8);
    match regime {
        Regime::CriticalK0 => report.m0 = Some(curve.mass(T::one())?),
        Regime::BandWithM0 if p > p_mass => {
            report.omega0 = curve.omega0();
            if let Some(w0) = report.omega0 {
                report.mass_min = Some(curve.mass(w0)?);
            }
        }
        Regime::BandWithM0 => report.mass_min = Some(curve.mass(tiny)?),
        _ => {}
    }

    if d == 1 && k == 1 && p >= four {
        if let Some((w1, w2)) = omega_thresholds(p, params.beta) {
            report.omega1 = Some(w1);
            report.omega2 = Some(w2);
            report.m0 = Some(curve.mass(w2)?);
        } else {
            report.m0 = Some(curve.mass(tiny)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(d: usize, k: usize, p: f64) -> RegimeReport<f64> {
        classify_regime(&ModelParams::new(d, k, p, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn k0_regimes() {
        let r = classify(1, 0, 2.0);
        assert_eq!(r.regime, Regime::SubcriticalAllStable);
        assert_eq!(r.infimum, InfimumVerdict::NegativeForAll);
        let r = classify(1, 0, 6.0);
        assert_eq!(r.regime, Regime::SupercriticalK0);
        assert!(r.to_json().contains("I_m = −∞"));
        let r = classify(1, 0, 4.0);
        assert_eq!(r.regime, Regime::CriticalK0);
        assert!((r.m0.unwrap() - 3f64.sqrt() * std::f64::consts::PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn band_regime_in_two_dimensions() {
        let r = classify(2, 1, 3.0);
        assert_eq!(r.regime, Regime::BandWithM0);
        assert_eq!(r.p_upper, Some(4.0));
        let w0 = r.omega0.unwrap();
        assert!(w0 > 0.0);
        for s in &r.slope_samples {
            let expect = if s.omega < w0 { -1 } else { 1 };
            assert_eq!(s.sign, expect, "omega={}", s.omega);
        }
        assert!(r.m0.is_none());
        assert!(r.mass_min.unwrap() > 0.0);
    }

    #[test]
    fn boundary_and_supercritical_k_ge_1() {
        assert_eq!(classify(2, 1, 4.0).regime, Regime::BoundaryUncovered);
        let r = classify(2, 1, 5.0);
        assert_eq!(r.regime, Regime::SupercriticalKGe1);
        assert!(r.regime.infimum_unbounded());
        // Slope is negative at both ends of the sampled range.
        assert_eq!(r.slope_samples.first().unwrap().sign, -1);
        assert_eq!(r.slope_samples.last().unwrap().sign, -1);
        // Beyond p_c there is no profile, but the label is still defined.
        let r = classify(3, 1, 5.0);
        assert_eq!(r.regime, Regime::SupercriticalKGe1);
        assert!(r.slope_samples.is_empty());
    }

    #[test]
    fn full_regularization_band_extends_to_p_c() {
        assert_eq!(classify(2, 2, 8.0).regime, Regime::BandWithM0);
        assert_eq!(classify(2, 2, 8.0).p_upper, None);
        assert_eq!(classify(3, 3, 3.0).regime, Regime::BandWithM0);
        assert_eq!(classify(3, 3, 4.0).regime, Regime::BoundaryUncovered);
    }

    #[test]
    fn one_dimensional_thresholds() {
        let r = classify(1, 1, 6.0);
        assert_eq!(r.regime, Regime::BandWithM0);
        let (w0, w1, w2) = (r.omega0.unwrap(), r.omega1.unwrap(), r.omega2.unwrap());
        assert!((w0 - w1).abs() < 1e-10 * w1);
        assert_eq!(w2, 0.5);
        assert!((r.m0.unwrap() - 1.835_94).abs() < 1e-5);
        assert!((r.mass_min.unwrap() - 1.753_20).abs() < 1e-5);

        let r = classify(1, 1, 4.0);
        assert!(r.omega0.is_none());
        assert!((r.m0.unwrap() - 3f64.sqrt() * std::f64::consts::PI / 4.0).abs() < 1e-6);
    }
}
