use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{classify_regime_with, p_critical, MassCurve, ModelParams, QNorms};
use crate::error::Result;
use crate::evolution::EvolveConfig;
use crate::ground_state::auto_grid;
use crate::output::{csv_row, float17};

use super::{stability_experiment, ExperimentSpec, Perturbation, Verdict};

/// Optional evolution run attached to every sweep point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepExperiment {
    pub amplitude: f64,
    pub seed: u64,
    pub dt: f64,
    pub t_final: f64,
    /// Points per axis; `None` uses the default resolution.
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepSpec {
    pub d: Vec<usize>,
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    pub omega: Vec<f64>,
    pub experiment: Option<SweepExperiment>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub omega: f64,
    pub regime: Option<&'static str>,
    pub m: Option<f64>,
    pub m_prime: Option<f64>,
    pub m_prime_sign: Option<i8>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    pub omega0: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    /// `stable_non_ground_state` when `E(phi_omega) > 0` and `m' > 0`.
    pub flag: Option<&'static str>,
    pub verdict: Option<Verdict>,
    pub growth_ratio: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "d,k,p,beta,omega,regime,m,m_prime,m_prime_sign,E,omega0,omega1,omega2,flag,verdict,growth_ratio,error";

impl SweepRow {
    fn empty(d: usize, k: usize, p: f64, beta: f64, omega: f64) -> Self {
        Self {
            d,
            k,
            p,
            beta,
            omega,
            regime: None,
            m: None,
            m_prime: None,
            m_prime_sign: None,
            energy: None,
            omega0: None,
            omega1: None,
            omega2: None,
            flag: None,
            verdict: None,
            growth_ratio: None,
            error: None,
        }
    }

    pub fn to_csv(&self) -> String {
        let f = |x: Option<f64>| x.map(float17).unwrap_or_default();
        csv_row([
            self.d.to_string(),
            self.k.to_string(),
            float17(self.p),
            float17(self.beta),
            float17(self.omega),
            self.regime.unwrap_or_default().to_string(),
            f(self.m),
            f(self.m_prime),
            self.m_prime_sign.map(|s| s.to_string()).unwrap_or_default(),
            f(self.energy),
            f(self.omega0),
            f(self.omega1),
            f(self.omega2),
            self.flag.unwrap_or_default().to_string(),
            self.verdict.map(|v| v.as_str().to_string()).unwrap_or_default(),
            f(self.growth_ratio),
            self.error.clone().unwrap_or_default(),
        ])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub rows: Vec<SweepRow>,
}

impl PhaseDiagram {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }
}

fn fill(row: &mut SweepRow, exp: Option<&SweepExperiment>) -> Result<()> {
    let params = ModelParams::new(row.d, row.k, row.p, row.beta)?.with_omega(row.omega)?;
    let subcritical = row.p < p_critical::<f64>(row.d);
    let norms = if subcritical { Some(QNorms::compute(row.d, row.p)?) } else { None };
    let report = classify_regime_with(&params, norms)?;
    row.regime = Some(report.regime.label());
    row.omega0 = report.omega0;
    row.omega1 = report.omega1;
    row.omega2 = report.omega2;
    if let Some(norms) = norms {
        let curve = MassCurve::new(&params, norms)?;
        let mp = curve.mass_prime(row.omega)?;
        let e = curve.energy(row.omega)?;
        row.m = Some(curve.mass(row.omega)?);
        row.m_prime = Some(mp);
        row.m_prime_sign = Some(if mp > 0.0 {
            1
        } else if mp < 0.0 {
            -1
        } else {
            0
        });
        row.energy = Some(e);
        if e > 0.0 && mp > 0.0 {
            row.flag = Some("stable_non_ground_state");
        }
    }
    if let Some(exp) = exp {
        let grid = auto_grid(&params, row.omega, exp.n)?;
        let spec = ExperimentSpec::new(Perturbation::Noise { seed: exp.seed }, exp.amplitude);
        let verdict = stability_experiment(&params, &grid, &spec, &EvolveConfig::new(exp.dt, exp.t_final))?;
        row.verdict = Some(verdict.verdict);
        row.growth_ratio = Some(verdict.growth_ratio);
    }
    Ok(())
}

/// Evaluates every `(d, k <= d, p, beta, omega)` combination in parallel.
/// Rows come back sorted by that key; failures are recorded per row.
pub fn phase_diagram(spec: &SweepSpec) -> PhaseDiagram {
    let mut points = Vec::new();
    for &d in &spec.d {
        for &k in spec.k.iter().filter(|&&k| k <= d) {
            for &p in &spec.p {
                for &beta in &spec.beta {
                    for &omega in &spec.omega {
                        points.push((d, k, p, beta, omega));
                    }
                }
            }
        }
    }
    let mut rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|(d, k, p, beta, omega)| {
            let mut row = SweepRow::empty(d, k, p, beta, omega);
            if let Err(e) = fill(&mut row, spec.experiment.as_ref()) {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.d, a.k)
            .cmp(&(b.d, b.k))
            .then(a.p.total_cmp(&b.p))
            .then(a.beta.total_cmp(&b.beta))
            .then(a.omega.total_cmp(&b.omega))
    });
    PhaseDiagram { rows }
}
