#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rnls::closed_forms::{classify_regime, default_points, me_explicit_d1k1, MassCurve, ModelParams};
use rnls::evolution::{snapshot_name, EvolveConfig, Evolver};
use rnls::functionals::FunctionalReport;
use rnls::ground_state::{auto_grid, bound_state, minimize_im, FlowOptions};
use rnls::linearized::{lowest_eigs, EigenOptions, LinearizedOperator, OperatorKind};
use rnls::output::{csv_row, float17, to_json};
use rnls::stability::{
    phase_diagram, stability_experiment, ExperimentSpec, Metric, Perturbation, SweepExperiment, SweepSpec,
    DEFAULT_RATIO_THRESHOLD,
};
use rnls::{snapshot, Grid, GridSpec};

use config::ConfigFile;
use manifest::{GridInfo, Manifest, OutputDir};

const DEFAULT_OUT: &str = "rnls-out";

#[derive(Parser, Debug)]
#[command(
    name = "rnls",
    version = concat!(env!("CARGO_PKG_VERSION"), " (snapshot format RNLS1)"),
    about = "Bound states, mass curves, spectra and stability runs for i(P_beta u)_t + Laplacian u + |u|^p u = 0"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct Common {
    /// Spatial dimension
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Number of regularized (trailing) coordinates
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Nonlinearity exponent
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Regularization strength
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Phase speed
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Mass constraint for the gradient flow
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Grid points per axis
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Box length on every axis (default: chosen from the decay rate)
    #[arg(long = "L", global = true)]
    length: Option<f64>,
    /// Time step
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Final time
    #[arg(long = "T", global = true)]
    t_final: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample phi_omega (shooting) or minimize E at fixed mass (flow)
    Groundstate {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Tabulate m(omega), its slope and E(phi_omega)
    Masscurve {
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        num: Option<usize>,
        /// Log-spaced instead of evenly spaced omega
        #[arg(long)]
        log: bool,
    },
    /// Regime, infimum verdict and thresholds as JSON
    Classify,
    /// Explicit mass and energy table for d = k = 1
    MeExplicit {
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        num: Option<usize>,
    },
    /// Lowest eigenvalues of L1 or L2 at phi_omega
    Spectrum {
        #[arg(long, value_enum)]
        op: Option<OpArg>,
        #[arg(long)]
        n_eigs: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write every eigenfield as a snapshot
        #[arg(long)]
        dump_eigenfields: bool,
    },
    /// Integrate from a snapshot (or from phi_omega) and log conserved quantities
    Evolve {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        snapshot_stride: Option<usize>,
        #[arg(long)]
        monitor_stride: Option<usize>,
        #[arg(long)]
        no_dealias: bool,
    },
    /// Perturb phi_omega, evolve, and track the orbital distance
    Stability {
        #[arg(long, value_enum)]
        perturbation: Option<PerturbArg>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        ratio_threshold: Option<f64>,
        #[arg(long)]
        sample_stride: Option<usize>,
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Regime table over a parameter grid; lists are comma separated
    Sweep {
        #[arg(long)]
        ds: Option<String>,
        #[arg(long)]
        ks: Option<String>,
        #[arg(long)]
        ps: Option<String>,
        #[arg(long)]
        betas: Option<String>,
        #[arg(long)]
        omegas: Option<String>,
        /// Worker threads
        #[arg(long)]
        jobs: Option<usize>,
        /// Run a noise stability experiment at every point
        #[arg(long)]
        experiment: bool,
        #[arg(long)]
        amplitude: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Groundstate { .. } => "groundstate",
            Self::Masscurve { .. } => "masscurve",
            Self::Classify => "classify",
            Self::MeExplicit { .. } => "me-explicit",
            Self::Spectrum { .. } => "spectrum",
            Self::Evolve { .. } => "evolve",
            Self::Stability { .. } => "stability",
            Self::Sweep { .. } => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Shoot,
    Flow,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PerturbArg {
    Scale,
    Noise,
    Mode,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    H1,
    L2,
}

const CONFIG_KEYS: &[&str] = &[
    "d",
    "k",
    "p",
    "beta",
    "omega",
    "m",
    "n",
    "L",
    "dt",
    "T",
    "seed",
    "out",
    "method",
    "omega_min",
    "omega_max",
    "num",
    "log",
    "op",
    "n_eigs",
    "tol",
    "dump_eigenfields",
    "input",
    "snapshot_stride",
    "monitor_stride",
    "no_dealias",
    "perturbation",
    "amplitude",
    "ratio_threshold",
    "sample_stride",
    "metric",
    "ds",
    "ks",
    "ps",
    "betas",
    "omegas",
    "jobs",
    "experiment",
];

/// A failure of the numerics rather than of the request.
#[derive(Debug)]
struct NumericalFailure(String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<NumericalFailure>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<rnls::Error>() {
            return match e {
                rnls::Error::BracketNotFound { .. }
                | rnls::Error::Divergence { .. }
                | rnls::Error::NoConvergence { .. }
                | rnls::Error::NonFinite(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

/// Resolved settings: defaults, then the config file, then flags.
struct Ctx {
    common: Common,
    file: ConfigFile,
}

impl Ctx {
    fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key),
        }
    }

    fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    fn flag(&self, key: &str, set: bool) -> Result<bool> {
        Ok(set || self.file.get::<bool>(key)?.unwrap_or(false))
    }

    fn choice<E: ValueEnum>(&self, key: &str, flag: Option<E>, default: E) -> Result<E> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get::<String>(key)? {
            None => Ok(default),
            Some(raw) => E::from_str(&raw, true).map_err(|e| anyhow!("config key {key}: {e}")),
        }
    }

    fn model(&self) -> Result<ModelParams<f64>> {
        let d = self.or("d", self.common.d, 1)?;
        let k = self.or("k", self.common.k, 0)?;
        let p = self.or("p", self.common.p, 2.0)?;
        let beta = self.or("beta", self.common.beta, 1.0)?;
        Ok(ModelParams::new(d, k, p, beta)?)
    }

    fn omega(&self) -> Result<f64> {
        self.or("omega", self.common.omega, 1.0)
    }

    fn seed(&self) -> Result<u64> {
        self.or("seed", self.common.seed, 0)
    }

    fn dt(&self) -> Result<f64> {
        self.or("dt", self.common.dt, 1e-3)
    }

    fn t_final(&self) -> Result<f64> {
        self.or("T", self.common.t_final, 20.0)
    }

    fn out(&self) -> Result<PathBuf> {
        self.or("out", self.common.out.clone(), PathBuf::from(DEFAULT_OUT))
    }

    fn grid(&self, params: &ModelParams<f64>, omega: f64) -> Result<Arc<Grid<f64>>> {
        let n = self.or("n", self.common.n, default_points(params.d, params.p))?;
        match self.pick("L", self.common.length)? {
            Some(l) => Ok(Grid::new(GridSpec::cubic(params.d, params.k, n, l)?)),
            None => Ok(auto_grid(params, omega, Some(n))?),
        }
    }
}

fn model_json(params: &ModelParams<f64>) -> Value {
    json!({ "d": params.d, "k": params.k, "p": params.p, "beta": params.beta })
}

fn linspace(lo: f64, hi: f64, num: usize, log: bool) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && num >= 1) {
        bail!("need 0 < omega_min <= omega_max and num >= 1, got {lo}, {hi}, {num}");
    }
    if num == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..num)
        .map(|i| {
            let t = i as f64 / (num - 1) as f64;
            if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect())
}

fn parse_list<T: FromStr>(name: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow!("--{name}: cannot parse {s:?}: {e}")))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let unknown = file.unknown_keys(CONFIG_KEYS);
    if !unknown.is_empty() {
        bail!("unknown config keys: {}", unknown.join(", "));
    }
    let ctx = Ctx { common: cli.common, file };
    let mut out = OutputDir::create(ctx.out()?)?;
    let mut manifest = Manifest::start(cli.command.name());

    match cli.command {
        Command::Groundstate { method } => match ctx.choice("method", method, Method::Shoot)? {
            Method::Shoot => {
                let omega = ctx.omega()?;
                let params = ctx.model()?.with_omega(omega)?;
                let grid = ctx.grid(&params, omega)?;
                let phi = bound_state(&params, &grid)?.phi;
                let report = FunctionalReport::evaluate(&phi, params.p, params.beta, omega)?;
                out.snapshot("groundstate.rnls", &phi)?;
                out.text("groundstate.json", &report.to_json())?;
                manifest.params = json!({ "model": model_json(&params), "method": "shoot", "omega": omega });
                manifest.grid = Some(GridInfo::of(&grid));
            }
            Method::Flow => {
                let params = ctx.model()?;
                let m = ctx.pick("m", ctx.common.m)?.ok_or_else(|| anyhow!("groundstate --method flow needs --m"))?;
                let omega = ctx.omega()?;
                let grid = ctx.grid(&params, omega)?;
                let opts = FlowOptions { seed: ctx.seed()?, ..FlowOptions::default() };
                let res = minimize_im(&params, &grid, m, &opts)?;
                out.snapshot("minimizer.rnls", &res.minimizer)?;
                out.text("minimizer.json", &to_json(&res.sidecar(&params, m)))?;
                manifest.params = json!({ "model": model_json(&params), "method": "flow", "m": m, "flow": opts });
                manifest.grid = Some(GridInfo::of(&grid));
                manifest.seeds.push(opts.seed);
            }
        },
        Command::Masscurve { omega_min, omega_max, num, log } => {
            let params = ctx.model()?;
            let lo = ctx.or("omega_min", omega_min, 0.01)?;
            let hi = ctx.or("omega_max", omega_max, 10.0)?;
            let num = ctx.or("num", num, 100)?;
            let log = ctx.flag("log", log)?;
            let curve = MassCurve::for_params(&params)?;
            let mut csv = String::from("omega,m,m_prime_closed,m_prime_fd,E\n");
            for w in linspace(lo, hi, num, log)? {
                let row = [w, curve.mass(w)?, curve.mass_prime(w)?, curve.mass_prime_fd(w)?, curve.energy(w)?];
                csv.push_str(&csv_row(row.iter().map(|&x| float17(x))));
                csv.push('\n');
            }
            out.text("masscurve.csv", &csv)?;
            manifest.params = json!({ "model": model_json(&params), "omega_min": lo, "omega_max": hi, "num": num, "log": log });
        }
        Command::Classify => {
            let params = ctx.model()?;
            let report = classify_regime(&params)?;
            let text = report.to_json();
            println!("{text}");
            out.text("classify.json", &text)?;
            manifest.params = json!({ "model": model_json(&params) });
        }
        Command::MeExplicit { omega_min, omega_max, num } => {
            let params = ctx.model()?;
            if params.d != 1 || params.k != 1 {
                bail!("me-explicit needs d = k = 1, got d = {}, k = {}", params.d, params.k);
            }
            let lo = ctx.or("omega_min", omega_min, 0.05)?;
            let hi = ctx.or("omega_max", omega_max, 5.0)?;
            let num = ctx.or("num", num, 100)?;
            let mut csv = String::from("omega,theta,m,pbeta_pairing,E\n");
            for w in linspace(lo, hi, num, false)? {
                let ex = me_explicit_d1k1(params.p, params.beta, w)?;
                let row = [w, ex.theta, ex.mass, ex.pbeta_pairing, ex.energy];
                csv.push_str(&csv_row(row.iter().map(|&x| float17(x))));
                csv.push('\n');
            }
            out.text("me_explicit.csv", &csv)?;
            manifest.params = json!({ "model": model_json(&params), "omega_min": lo, "omega_max": hi, "num": num });
        }
        Command::Spectrum { op, n_eigs, tol, dump_eigenfields } => {
            let omega = ctx.omega()?;
            let params = ctx.model()?.with_omega(omega)?;
            let grid = ctx.grid(&params, omega)?;
            let phi = bound_state(&params, &grid)?.phi;
            let kind = match ctx.choice("op", op, OpArg::L1)? {
                OpArg::L1 => OperatorKind::L1,
                OpArg::L2 => OperatorKind::L2,
            };
            let n_eigs = ctx.or("n_eigs", n_eigs, 4)?;
            let opts = EigenOptions { tol: ctx.or("tol", tol, 1e-7)?, seed: ctx.seed()?, ..EigenOptions::default() };
            let linop = LinearizedOperator::new(kind, &phi, omega, params.beta, params.p)?;
            let spec = lowest_eigs(&linop, n_eigs, &opts)?;
            out.text("spectrum.csv", &spec.to_csv())?;
            if ctx.flag("dump_eigenfields", dump_eigenfields)? {
                for (i, pair) in spec.pairs.iter().enumerate() {
                    out.snapshot(&format!("eigenfield_{i:02}.rnls"), &pair.vector)?;
                }
            }
            manifest.params = json!({
                "model": model_json(&params),
                "omega": omega,
                "op": format!("{kind:?}"),
                "n_eigs": n_eigs,
                "tol": opts.tol,
                "max_matvecs": opts.max_matvecs,
                "matvecs": spec.matvecs,
                "scale": spec.scale,
            });
            manifest.grid = Some(GridInfo::of(&grid));
            manifest.seeds.push(opts.seed);
        }
        Command::Evolve { input, snapshot_stride, monitor_stride, no_dealias } => {
            let params = ctx.model()?;
            let input: Option<PathBuf> = ctx.pick("input", input)?;
            let (u0, grid, source) = match &input {
                Some(path) => {
                    if !path.is_file() {
                        bail!("input file {} does not exist", path.display());
                    }
                    let u = snapshot::load::<f64>(path).with_context(|| format!("reading {}", path.display()))?;
                    let g = u.grid().clone();
                    (u, g, path.display().to_string())
                }
                None => {
                    let omega = ctx.omega()?;
                    let params = params.clone().with_omega(omega)?;
                    let g = ctx.grid(&params, omega)?;
                    (bound_state(&params, &g)?.phi, g, format!("phi_omega with omega = {omega}"))
                }
            };
            if grid.d() != params.d || grid.k() != params.k {
                bail!("input lives on a (d = {}, k = {}) grid but --d/--k give ({}, {})", grid.d(), grid.k(), params.d, params.k);
            }
            let mut cfg = EvolveConfig::new(ctx.dt()?, ctx.t_final()?);
            cfg.snapshot_stride = ctx.or("snapshot_stride", snapshot_stride, 0)?;
            cfg.monitor_stride = ctx.or("monitor_stride", monitor_stride, 10)?;
            cfg.dealias = !ctx.flag("no_dealias", no_dealias)?;
            let evolver = Evolver::new(&grid, params.p, params.beta, cfg.dealias)?;
            let outcome = evolver.evolve_with(&u0, &cfg, |i, _, u| out.snapshot(&snapshot_name(i), u))?;
            out.text("conservation.csv", &outcome.log.to_csv())?;
            manifest.params = json!({
                "model": model_json(&params),
                "initial": source,
                "dt": outcome.dt,
                "T": cfg.t_final,
                "steps": outcome.steps,
                "snapshot_stride": cfg.snapshot_stride,
                "monitor_stride": cfg.monitor_stride,
                "dealias": cfg.dealias,
                "blowup": outcome.blowup,
                "mass_drift": outcome.log.mass_drift(),
                "energy_drift": outcome.log.energy_drift(),
            });
            manifest.grid = Some(GridInfo::of(&grid));
            if outcome.blowup {
                manifest.finish(&mut out)?;
                return Err(NumericalFailure(format!("solution blew up at t = {}", outcome.t)).into());
            }
        }
        Command::Stability { perturbation, amplitude, ratio_threshold, sample_stride, metric } => {
            let omega = ctx.omega()?;
            let params = ctx.model()?.with_omega(omega)?;
            let grid = ctx.grid(&params, omega)?;
            let seed = ctx.seed()?;
            let kind = match ctx.choice("perturbation", perturbation, PerturbArg::Noise)? {
                PerturbArg::Scale => Perturbation::Scale,
                PerturbArg::Noise => Perturbation::Noise { seed },
                PerturbArg::Mode => {
                    let phi = bound_state(&params, &grid)?.phi;
                    let op = LinearizedOperator::new(OperatorKind::L1, &phi, omega, params.beta, params.p)?;
                    let spec = lowest_eigs(&op, 1, &EigenOptions { seed, ..EigenOptions::default() })?;
                    Perturbation::Mode(spec.pairs[0].vector.clone())
                }
            };
            let mut spec = ExperimentSpec::new(kind, ctx.or("amplitude", amplitude, 0.01)?);
            spec.ratio_threshold = ctx.or("ratio_threshold", ratio_threshold, DEFAULT_RATIO_THRESHOLD)?;
            spec.sample_stride = ctx.or("sample_stride", sample_stride, 10)?;
            spec.metric = match ctx.choice("metric", metric, MetricArg::H1)? {
                MetricArg::H1 => Metric::H1,
                MetricArg::L2 => Metric::L2,
            };
            let cfg = EvolveConfig::new(ctx.dt()?, ctx.t_final()?);
            let verdict = stability_experiment(&params, &grid, &spec, &cfg)?;
            out.text("verdict.csv", &verdict.to_csv())?;
            let meta = verdict.metadata(&params, &spec, &cfg, &grid);
            out.text("verdict.json", &to_json(&meta))?;
            println!("{}: growth ratio {}", verdict.verdict, float17(verdict.growth_ratio));
            manifest.params = serde_json::to_value(&meta)?;
            manifest.grid = Some(GridInfo::of(&grid));
            manifest.seeds.push(seed);
        }
        Command::Sweep { ds, ks, ps, betas, omegas, jobs, experiment, amplitude } => {
            let model = ctx.model()?;
            let list_or = |key: &str, flag: Option<String>, one: String| -> Result<String> { ctx.or(key, flag, one) };
            let spec = SweepSpec {
                d: parse_list("ds", &list_or("ds", ds, model.d.to_string())?)?,
                k: parse_list("ks", &list_or("ks", ks, model.k.to_string())?)?,
                p: parse_list("ps", &list_or("ps", ps, model.p.to_string())?)?,
                beta: parse_list("betas", &list_or("betas", betas, model.beta.to_string())?)?,
                omega: parse_list("omegas", &list_or("omegas", omegas, ctx.omega()?.to_string())?)?,
                experiment: if ctx.flag("experiment", experiment)? {
                    Some(SweepExperiment {
                        amplitude: ctx.or("amplitude", amplitude, 0.01)?,
                        seed: ctx.seed()?,
                        dt: ctx.dt()?,
                        t_final: ctx.t_final()?,
                        n: ctx.pick("n", ctx.common.n)?,
                    })
                } else {
                    None
                },
            };
            let jobs = ctx.or("jobs", jobs, 1)?;
            if jobs == 0 {
                bail!("--jobs must be at least 1");
            }
            let pool = rayon_pool(jobs)?;
            let diagram = pool.install(|| phase_diagram(&spec));
            out.text("sweep.csv", &diagram.to_csv())?;
            manifest.params = json!({
                "sweep": spec,
                "jobs": jobs,
                "ratio_threshold": DEFAULT_RATIO_THRESHOLD,
                "flag_rule": "stable_non_ground_state when E > 0 and m' > 0",
            });
            if let Some(e) = spec.experiment {
                manifest.seeds.push(e.seed);
            }
        }
    }
    manifest.finish(&mut out)
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
