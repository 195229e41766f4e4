//! Orbital distance to the bound-state orbit, perturbation experiments and
//! parameter sweeps.
//!
//! A run counts as orbitally bounded when the largest sampled distance stays
//! within [`DEFAULT_RATIO_THRESHOLD`] times the initial one.

mod experiment;
mod orbital;
mod perturb;
mod sweep;

pub use experiment::{
    classify, stability_experiment, track_orbit, ExperimentSpec, StabilityVerdict, Verdict, VerdictMetadata,
    VerdictSample, DEFAULT_RATIO_THRESHOLD,
};
pub use orbital::{orbital_distance, Metric, OrbitalFit};
pub use perturb::{bandlimited_noise, perturb, Perturbation};
pub use sweep::{phase_diagram, PhaseDiagram, SweepExperiment, SweepRow, SweepSpec, SWEEP_HEADER};
