use std::sync::Arc;

use serde::Serialize;

use crate::closed_forms::ModelParams;
use crate::error::{Error, Result};
use crate::evolution::{EvolveConfig, Evolver};
use crate::field::Field;
use crate::functionals::{energy, mass};
use crate::grid::Grid;
use crate::ground_state::bound_state;
use crate::output::{csv_row, real17};
use crate::scalar::{lit, to_f64, Real};

use super::{orbital_distance, perturb, Metric, Perturbation};

/// Default bound on `max_t dist(t) / dist(0)` for a bounded verdict.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Blowup,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bounded => "bounded",
            Self::Growing => "growing",
            Self::Blowup => "blowup",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec<T: Real> {
    pub perturbation: Perturbation<T>,
    pub amplitude: T,
    pub metric: Metric,
    pub ratio_threshold: T,
    /// Orbital distance is sampled every this many steps.
    pub sample_stride: usize,
}

impl<T: Real> ExperimentSpec<T> {
    pub fn new(perturbation: Perturbation<T>, amplitude: T) -> Self {
        Self { perturbation, amplitude, metric: Metric::H1, ratio_threshold: lit(DEFAULT_RATIO_THRESHOLD), sample_stride: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictSample<T> {
    pub t: T,
    pub distance: T,
    pub mass: T,
    pub energy: T,
}

#[derive(Clone, Debug)]
pub struct StabilityVerdict<T: Real> {
    pub samples: Vec<VerdictSample<T>>,
    pub initial_distance: T,
    pub max_distance: T,
    pub growth_ratio: T,
    pub ratio_threshold: T,
    pub verdict: Verdict,
    /// Time reached; short of the horizon after a blow-up.
    pub t_end: T,
    pub dt: T,
}

#[derive(Serialize)]
pub struct VerdictMetadata {
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub omega: f64,
    pub perturbation: &'static str,
    pub seed: Option<u64>,
    pub amplitude: f64,
    pub metric: Metric,
    pub ratio_threshold: f64,
    pub dt: f64,
    pub t_final: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub initial_distance: f64,
    pub max_distance: f64,
    pub growth_ratio: f64,
    pub verdict: Verdict,
}

impl<T: Real> StabilityVerdict<T> {
    /// `t,orbital_distance,M,E` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,orbital_distance,M,E\n");
        for s in &self.samples {
            out.push_str(&csv_row([real17(s.t), real17(s.distance), real17(s.mass), real17(s.energy)]));
            out.push('\n');
        }
        out
    }

    pub fn metadata(
        &self,
        params: &ModelParams<T>,
        spec: &ExperimentSpec<T>,
        config: &EvolveConfig<T>,
        grid: &Grid<T>,
    ) -> VerdictMetadata {
        VerdictMetadata {
            d: params.d,
            k: params.k,
            p: to_f64(params.p),
            beta: to_f64(params.beta),
            omega: params.omega.map(to_f64).unwrap_or(f64::NAN),
            perturbation: spec.perturbation.label(),
            seed: match spec.perturbation {
                Perturbation::Noise { seed } => Some(seed),
                _ => None,
            },
            amplitude: to_f64(spec.amplitude),
            metric: spec.metric,
            ratio_threshold: to_f64(self.ratio_threshold),
            dt: to_f64(self.dt),
            t_final: to_f64(config.t_final),
            t_end: to_f64(self.t_end),
            sample_stride: spec.sample_stride,
            dims: grid.spec().dims().to_vec(),
            lengths: grid.spec().lengths().to_vec(),
            initial_distance: to_f64(self.initial_distance),
            max_distance: to_f64(self.max_distance),
            growth_ratio: to_f64(self.growth_ratio),
            verdict: self.verdict,
        }
    }
}

/// Classifies a sampled distance history.
pub fn classify<T: Real>(initial: T, max: T, threshold: T, blowup: bool) -> Verdict {
    if blowup {
        Verdict::Blowup
    } else if max <= threshold * initial {
        Verdict::Bounded
    } else {
        Verdict::Growing
    }
}

/// Evolves `u0` and tracks its orbital distance to `phi`.
pub fn track_orbit<T: Real>(
    u0: &Field<T>,
    phi: &Field<T>,
    p: T,
    beta: T,
    spec: &ExperimentSpec<T>,
    config: &EvolveConfig<T>,
) -> Result<StabilityVerdict<T>> {
    if spec.sample_stride == 0 {
        return Err(Error::InvalidParams("sample stride must be positive".into()));
    }
    let evolver = Evolver::new(phi.grid(), p, beta, config.dealias)?;
    let cfg = EvolveConfig { snapshot_stride: spec.sample_stride, monitor_stride: spec.sample_stride, ..*config };
    let mut samples = Vec::new();
    let outcome = evolver.evolve_with(u0, &cfg, |_, t, u| {
        let fit = orbital_distance(u, phi, spec.metric)?;
        samples.push(VerdictSample { t, distance: fit.distance, mass: mass(u, beta), energy: energy(u, p) });
        Ok(())
    })?;
    let initial = samples[0].distance;
    if !(initial > T::zero()) {
        return Err(Error::InvalidParams("initial state lies on the orbit; nothing to track".into()));
    }
    let max = samples.iter().map(|s| s.distance).fold(T::zero(), T::max);
    let ratio = max / initial;
    Ok(StabilityVerdict {
        initial_distance: initial,
        max_distance: max,
        growth_ratio: ratio,
        ratio_threshold: spec.ratio_threshold,
        verdict: classify(initial, max, spec.ratio_threshold, outcome.blowup),
        t_end: outcome.t,
        dt: outcome.dt,
        samples,
    })
}

/// Perturbs `phi_omega` on `grid` and evolves it under `config`.
pub fn stability_experiment<T: Real>(
    params: &ModelParams<T>,
    grid: &Arc<Grid<T>>,
    spec: &ExperimentSpec<T>,
    config: &EvolveConfig<T>,
) -> Result<StabilityVerdict<T>> {
    let phi = bound_state(params, grid)?.phi;
    let u0 = perturb(&phi, &spec.perturbation, spec.amplitude)?;
    track_orbit(&u0, &phi, params.p, params.beta, spec, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rule() {
        assert_eq!(classify(1.0f64, 5.0, 5.0, false), Verdict::Bounded);
        assert_eq!(classify(1.0f64, 5.0001, 5.0, false), Verdict::Growing);
        assert_eq!(classify(1.0f64, 1.0, 5.0, true), Verdict::Blowup);
        assert_eq!(serde_json::to_string(&Verdict::Blowup).unwrap(), "\"blowup\"");
    }
}
