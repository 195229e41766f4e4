use std::sync::Arc;

use serde::Serialize;

use crate::closed_forms::{phi_profile, MassCurve, ModelParams, ProfileSource, QNorms};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{apply_multiplier, inner, l2_norm_sq, InnerWeight, Multiplier};

use super::{LinearizedOperator, OperatorKind};

/// Relative identity residual above which the finite-difference step is
/// considered too coarse.
pub const VK_WARN_RESIDUAL: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct SlopeTestReport<T: Real> {
    pub omega: T,
    pub delta_omega: T,
    /// Central difference `(phi_{omega+delta} - phi_{omega-delta}) / (2 delta)`.
    pub psi: Field<T>,
    pub l1_psi_psi: T,
    pub m_prime: T,
    /// `|<L1 psi, psi> + m'| / |m'|`
    pub residual: T,
    /// `|L1 psi + P_beta phi|_2 / |P_beta phi|_2`
    pub equation_residual: T,
    /// Largest normalized overlap of `psi` with a translation mode.
    pub kernel_overlap: T,
    pub warning: Option<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    omega: f64,
    delta_omega: f64,
    l1_psi_psi: f64,
    m_prime: f64,
    residual: f64,
    equation_residual: f64,
    kernel_overlap: f64,
    signs_agree: bool,
    warning: Option<&'a str>,
}

impl<T: Real> SlopeTestReport<T> {
    /// `sign <L1 psi, psi> = -sign m'`.
    pub fn signs_agree(&self) -> bool {
        (self.l1_psi_psi < T::zero()) == (self.m_prime > T::zero())
    }

    pub fn to_json(&self) -> String {
        crate::output::to_json(&ReportJson {
            omega: to_f64(self.omega),
            delta_omega: to_f64(self.delta_omega),
            l1_psi_psi: to_f64(self.l1_psi_psi),
            m_prime: to_f64(self.m_prime),
            residual: to_f64(self.residual),
            equation_residual: to_f64(self.equation_residual),
            kernel_overlap: to_f64(self.kernel_overlap),
            signs_agree: self.signs_agree(),
            warning: self.warning.as_deref(),
        })
    }
}

/// Checks `<L1 psi, psi> = -m'(omega)` at `params.omega` with
/// `psi = d phi / d omega` taken by central difference.
///
/// `delta_omega` defaults to `omega * 1e-4`. For `d > 1` the caller passes the
/// radial profile source; `m'` is then taken from norms of that same profile.
pub fn vk_slope_test<T: Real>(
    params: &ModelParams<T>,
    source: ProfileSource<'_, T>,
    grid: &Arc<Grid<T>>,
    delta_omega: Option<T>,
) -> Result<SlopeTestReport<T>> {
    let omega = params.omega()?;
    let delta = delta_omega.unwrap_or(omega * lit(1e-4));
    if !(delta > T::zero() && delta < omega) {
        return Err(Error::InvalidParams(format!("delta_omega must lie in (0, omega), got {delta}")));
    }
    let at = |w: T| -> Result<Field<T>> { phi_profile(&params.clone().with_omega(w)?, source, grid) };
    let phi = at(omega)?;
    let plus = at(omega + delta)?;
    let minus = at(omega - delta)?;
    let psi = plus.sub(&minus)?.scaled(T::one() / (lit::<T>(2.0) * delta));

    let op = LinearizedOperator::new(OperatorKind::L1, &phi, omega, params.beta, params.p)?;
    let l1_psi = op.apply(&psi)?;
    let l1_psi_psi = inner(&l1_psi, &psi, InnerWeight::L2)?;

    let norms = match source {
        ProfileSource::Exact1d => QNorms::exact_1d(params.p),
        ProfileSource::Radial(r) => QNorms::from_radial(r),
    };
    let m_prime = MassCurve::new(params, norms)?.mass_prime(omega)?;
    let residual = (l1_psi_psi + m_prime).abs() / m_prime.abs();

    let pphi = apply_multiplier(&phi, Multiplier::PBeta, params.beta)?;
    let equation_residual = (l2_norm_sq(&l1_psi.add(&pphi)?) / l2_norm_sq(&pphi)).sqrt();

    let psi_norm = l2_norm_sq(&psi).sqrt();
    let mut kernel_overlap = T::zero();
    for mode in op.translation_modes() {
        let n = l2_norm_sq(&mode).sqrt();
        if n > T::zero() {
            kernel_overlap = kernel_overlap.max(inner(&psi, &mode, InnerWeight::L2)?.abs() / (n * psi_norm));
        }
    }

    let warning = (to_f64(residual) > VK_WARN_RESIDUAL).then(|| {
        format!("identity residual {residual} exceeds {VK_WARN_RESIDUAL}; delta_omega = {delta} may be too large")
    });
    Ok(SlopeTestReport {
        omega,
        delta_omega: delta,
        psi,
        l1_psi_psi,
        m_prime,
        residual,
        equation_residual,
        kernel_overlap,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::auto_box_lengths;
    use crate::grid::GridSpec;

    fn run(omega: f64, delta: Option<f64>) -> SlopeTestReport<f64> {
        let params = ModelParams::new(1, 1, 6.0, 1.0).unwrap().with_omega(omega).unwrap();
        let lo = omega - delta.unwrap_or(0.0);
        let g = Grid::new(GridSpec::new(1, 1, &[4096], &auto_box_lengths(&params, lo)).unwrap());
        vk_slope_test(&params, ProfileSource::Exact1d, &g, delta).unwrap()
    }

    #[test]
    fn signs_across_the_mass_minimum() {
        let hi = run(5.0, None);
        assert!(hi.l1_psi_psi < 0.0 && hi.m_prime > 0.0);
        let lo = run(0.1, None);
        assert!(lo.l1_psi_psi > 0.0 && lo.m_prime < 0.0);
        for r in [&hi, &lo] {
            assert!(r.signs_agree());
            assert!(r.residual < 1e-4, "{}", r.residual);
            assert!(r.kernel_overlap < 1e-8);
            assert!(r.warning.is_none());
        }
    }

    #[test]
    fn coarse_step_warns() {
        let r = run(1.0, Some(0.6));
        assert!(r.warning.is_some(), "residual {}", r.residual);
        assert!(r.to_json().contains("\"warning\": \"identity residual"));
    }
}
