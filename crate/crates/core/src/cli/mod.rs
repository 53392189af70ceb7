//! The `sigdyn` command line: subcommands map one-to-one onto experiment
//! modes, a JSON config (`schema: 1`) supplies defaults, and flags win.

mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    EnsembleSpec, ExperimentConfig, GeneratorSpec, GraphSource, Mode, Outputs, Tolerances,
    SCHEMA_VERSION,
};

use crate::dynamics_ct::{
    find_equilibria, integrate, EquilibriumOptions, EquilibriumSet, IntegrateOptions,
};
use crate::dynamics_dt::{
    classify_first_bifurcation, iterate, simulate, step_regime, DtOutcome, FirstBifurcation,
    StepRegime,
};
use crate::error::{Error, Result};
use crate::frustration::{
    bound_report, frustration_auto, frustration_exact_with_cap, frustration_heuristic, BoundReport,
    FrustrationResult, EXACT_CAP,
};
use crate::graph::{
    random_signed_graph, read_graph_file, write_graph_json, RandomGraphParams, SignedGraph,
};
use crate::nonlinearity::{NonlinearityProfile, ProfileSpec};
use crate::output::{fmt_f64, to_json_string};
use crate::spectra::{thresholds, SpectralSummary};
use crate::sweep::{sweep_ct, sweep_dt, PiGrid, SweepOptions};

const REGULARIZE_TOL: f64 = 1e-12;
const REGULARIZE_MAX_ITER: usize = 100_000;

/// An error tagged with the operation that raised it.
#[derive(Debug)]
pub struct Failure {
    pub op: &'static str,
    pub error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.op, self.error)
    }
}

impl std::error::Error for Failure {}

trait Op<T> {
    fn op(self, name: &'static str) -> std::result::Result<T, Failure>;
}

impl<T> Op<T> for Result<T> {
    fn op(self, name: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure { op: name, error })
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(
    name = "sigdyn",
    version,
    about = "Opinion dynamics on signed networks: thresholds, frustration, bifurcations"
)]
pub struct Cli {
    /// Worker threads for ensembles, grids and seeds.
    #[arg(long, global = true, env = "SIGDYN_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded random signed graph.
    Gen(GenArgs),
    /// Spectrum, thresholds, frustration and the threshold bound.
    Analyze(AnalyzeArgs),
    /// Frustration index and an optimal signature.
    Frustration(FrustrationArgs),
    /// Integrate the continuous-time model and list equilibria.
    SimulateCt(SimulateCtArgs),
    /// Iterate the Euler map and classify the outcome.
    SimulateDt(SimulateDtArgs),
    /// Continuous-time bifurcation diagram.
    SweepCt(SweepCtArgs),
    /// Euler-map bifurcation diagram.
    SweepDt(SweepDtArgs),
    /// Thresholds, frustration and bounds over a random ensemble.
    Ensemble(EnsembleArgs),
    /// Run the mode named in a config file.
    Run(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct Source {
    /// JSON config (`schema: 1`); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Graph file: JSON, or `.csv` edge list `i,j,w`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct Out {
    /// JSON output file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// CSV output file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct Psi {
    /// Nonlinearity: `tanh` (default) or `rational[:k]`.
    #[arg(long)]
    pub psi: Option<String>,
    /// Parameters for `--psi`, e.g. `k=2`.
    #[arg(long)]
    pub psi_params: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Probability that an edge is negative.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub weight_low: Option<f64>,
    #[arg(long)]
    pub weight_high: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rescale `|A|` to this constant row sum.
    #[arg(long)]
    pub regularize: Option<f64>,
    /// Output graph file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Euler step; adds the discrete-time threshold.
    #[arg(long)]
    pub eps_step: Option<f64>,
    /// Largest n solved exhaustively.
    #[arg(long)]
    pub exact_cap: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrustrationArgs {
    #[command(flatten)]
    pub source: Source,
    /// Exhaustive search (n <= cap).
    #[arg(long)]
    pub exact: bool,
    /// Force the heuristic.
    #[arg(long, conflicts_with = "exact")]
    pub heuristic: bool,
    #[arg(long)]
    pub exact_cap: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateCtArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub psi: Psi,
    #[command(flatten)]
    pub out: Out,
    #[arg(long)]
    pub pi: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// `zero`, `random`, or a JSON file holding an array.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random Newton seeds for the equilibrium list.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateDtArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub psi: Psi,
    #[command(flatten)]
    pub out: Out,
    #[arg(long)]
    pub pi: Option<f64>,
    #[arg(long)]
    pub eps_step: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// `zero`, `random`, or a JSON file holding an array.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepCtArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub psi: Psi,
    #[command(flatten)]
    pub out: Out,
    /// `start:step:end`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepDtArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub psi: Psi,
    #[command(flatten)]
    pub out: Out,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub eps_step: Option<f64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: Out,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated negative-edge probabilities, cycled over the ensemble.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub regularize: Option<f64>,
    #[arg(long)]
    pub eps_step: Option<f64>,
    #[arg(long)]
    pub exact_cap: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn base_config(path: Option<&Path>, mode: Mode) -> CliResult<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p).op("cli::config")?,
        None => ExperimentConfig {
            schema: SCHEMA_VERSION,
            ..Default::default()
        },
    };
    match cfg.mode {
        Some(m) if m != mode => {
            return Err(Failure {
                op: "cli::config",
                error: Error::Config(format!(
                    "config mode `{}` does not match `{}`",
                    m.as_str(),
                    mode.as_str()
                )),
            })
        }
        _ => cfg.mode = Some(mode),
    }
    Ok(cfg)
}

fn apply_source(cfg: &mut ExperimentConfig, s: &Source) {
    if let Some(g) = &s.graph {
        cfg.graph = Some(GraphSource::File(g.clone()));
    }
}

fn apply_psi(cfg: &mut ExperimentConfig, p: &Psi) -> CliResult<()> {
    if let Some(kind) = &p.psi {
        cfg.profile = Some(
            ProfileSpec::parse(kind, p.psi_params.as_deref()).op("nonlinearity::make_profile")?,
        );
    } else if let Some(params) = &p.psi_params {
        cfg.profile =
            Some(ProfileSpec::parse("rational", Some(params)).op("nonlinearity::make_profile")?);
    }
    Ok(())
}

fn apply_out(cfg: &mut ExperimentConfig, o: &Out) {
    set(&mut cfg.outputs.json, o.json.clone());
    set(&mut cfg.outputs.csv, o.csv.clone());
}

impl Command {
    /// Merges flags over the config file into one resolved config.
    pub fn into_config(self) -> CliResult<ExperimentConfig> {
        let cfg = match self {
            Command::Run(a) => {
                let cfg = ExperimentConfig::load(&a.config).op("cli::config")?;
                if cfg.mode.is_none() {
                    return Err(Failure {
                        op: "cli::config",
                        error: Error::Config("config has no `mode`".into()),
                    });
                }
                cfg
            }
            Command::Gen(a) => {
                let mut cfg = base_config(a.config.as_deref(), Mode::Gen)?;
                let mut spec = match cfg.graph.take() {
                    Some(GraphSource::Generate(g)) => Some(g),
                    _ => None,
                };
                match (&mut spec, a.n, a.p, a.beta) {
                    (Some(s), n, p, b) => {
                        if let Some(n) = n {
                            s.n = n;
                        }
                        if let Some(p) = p {
                            s.edge_prob = p;
                        }
                        if let Some(b) = b {
                            s.negative_prob = b;
                        }
                    }
                    (None, Some(n), Some(p), Some(b)) => {
                        spec = Some(GeneratorSpec {
                            n,
                            edge_prob: p,
                            negative_prob: b,
                            weight_low: None,
                            weight_high: None,
                            max_attempts: None,
                            seed: 0,
                            regularize: None,
                        })
                    }
                    _ => {
                        return Err(Failure {
                            op: "cli::gen",
                            error: Error::Config(
                                "gen needs --n, --p and --beta (or a generate config)".into(),
                            ),
                        })
                    }
                }
                let mut spec = spec.expect("set above");
                set(&mut spec.weight_low, a.weight_low);
                set(&mut spec.weight_high, a.weight_high);
                set(&mut spec.regularize, a.regularize);
                if let Some(s) = a.seed {
                    spec.seed = s;
                }
                cfg.graph = Some(GraphSource::Generate(spec));
                set(&mut cfg.outputs.graph, a.out);
                cfg
            }
            Command::Analyze(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::Analyze)?;
                apply_source(&mut cfg, &a.source);
                set(&mut cfg.eps_step, a.eps_step);
                set(&mut cfg.exact_cap, a.exact_cap);
                set(&mut cfg.restarts, a.restarts);
                set(&mut cfg.seed, a.seed);
                set(&mut cfg.outputs.json, a.json);
                cfg
            }
            Command::Frustration(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::Frustration)?;
                apply_source(&mut cfg, &a.source);
                if a.exact {
                    cfg.exact = Some(true);
                }
                if a.heuristic {
                    cfg.exact = Some(false);
                }
                set(&mut cfg.exact_cap, a.exact_cap);
                set(&mut cfg.restarts, a.restarts);
                set(&mut cfg.seed, a.seed);
                set(&mut cfg.outputs.json, a.json);
                cfg
            }
            Command::SimulateCt(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::SimulateCt)?;
                apply_source(&mut cfg, &a.source);
                apply_psi(&mut cfg, &a.psi)?;
                apply_out(&mut cfg, &a.out);
                set(&mut cfg.pi, a.pi);
                set(&mut cfg.horizon, a.horizon);
                set(&mut cfg.step, a.step);
                set(&mut cfg.x0, a.x0);
                set(&mut cfg.seed, a.seed);
                set(&mut cfg.seeds, a.seeds);
                set(&mut cfg.tolerances.stop_tol, a.stop_tol);
                cfg
            }
            Command::SimulateDt(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::SimulateDt)?;
                apply_source(&mut cfg, &a.source);
                apply_psi(&mut cfg, &a.psi)?;
                apply_out(&mut cfg, &a.out);
                set(&mut cfg.pi, a.pi);
                set(&mut cfg.eps_step, a.eps_step);
                set(&mut cfg.iters, a.iters);
                set(&mut cfg.x0, a.x0);
                set(&mut cfg.seed, a.seed);
                set(&mut cfg.tolerances.dt_tol, a.dt_tol);
                cfg
            }
            Command::SweepCt(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::SweepCt)?;
                apply_source(&mut cfg, &a.source);
                apply_psi(&mut cfg, &a.psi)?;
                apply_out(&mut cfg, &a.out);
                set(&mut cfg.grid, a.grid);
                set(&mut cfg.seeds, a.seeds);
                set(&mut cfg.seed, a.seed);
                cfg
            }
            Command::SweepDt(a) => {
                let mut cfg = base_config(a.source.config.as_deref(), Mode::SweepDt)?;
                apply_source(&mut cfg, &a.source);
                apply_psi(&mut cfg, &a.psi)?;
                apply_out(&mut cfg, &a.out);
                set(&mut cfg.grid, a.grid);
                set(&mut cfg.eps_step, a.eps_step);
                set(&mut cfg.seeds, a.seeds);
                set(&mut cfg.seed, a.seed);
                cfg
            }
            Command::Ensemble(a) => {
                let mut cfg = base_config(a.config.as_deref(), Mode::Ensemble)?;
                apply_out(&mut cfg, &a.out);
                let mut spec = cfg.ensemble.take().unwrap_or(EnsembleSpec {
                    count: 20,
                    n: 20,
                    edge_prob: 0.5,
                    betas: vec![0.1, 0.2, 0.3, 0.5],
                    weight_low: None,
                    weight_high: None,
                    regularize: None,
                });
                if let Some(v) = a.count {
                    spec.count = v;
                }
                if let Some(v) = a.n {
                    spec.n = v;
                }
                if let Some(v) = a.p {
                    spec.edge_prob = v;
                }
                if let Some(v) = a.betas {
                    spec.betas = v;
                }
                set(&mut spec.regularize, a.regularize);
                cfg.ensemble = Some(spec);
                set(&mut cfg.eps_step, a.eps_step);
                set(&mut cfg.exact_cap, a.exact_cap);
                set(&mut cfg.restarts, a.restarts);
                set(&mut cfg.seed, a.seed);
                cfg
            }
        };
        Ok(cfg)
    }
}

/// What a run produced: a human-readable summary and the files written.
#[derive(Debug, Default)]
pub struct RunReport {
    pub summary: String,
    /// Printed to stdout when no output path is configured.
    pub stdout_payload: Option<String>,
    pub written: Vec<PathBuf>,
}

fn write_file(path: &Path, content: &[u8], report: &mut RunReport) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(Error::from)
            .op("cli::write")?;
    }
    std::fs::write(path, content)
        .map_err(Error::from)
        .op("cli::write")?;
    report.written.push(path.to_path_buf());
    Ok(())
}

fn load_graph(cfg: &ExperimentConfig) -> CliResult<(SignedGraph, Option<serde_json::Value>)> {
    match &cfg.graph {
        None => Err(Failure {
            op: "graph::build_graph",
            error: Error::Config("no graph given (use --graph or a config `graph` entry)".into()),
        }),
        Some(GraphSource::File(p)) => read_graph_file(p).op("graph::build_graph"),
        Some(GraphSource::Generate(spec)) => {
            let params = spec.params();
            let mut g = random_signed_graph(&params, spec.seed).op("graph::random_signed_graph")?;
            if let Some(target) = spec.regularize {
                g = g
                    .regularize_degrees(target, REGULARIZE_TOL, REGULARIZE_MAX_ITER)
                    .op("graph::regularize_degrees")?;
            }
            let meta = serde_json::json!({
                "generator": "erdos-renyi-signed",
                "n": params.n,
                "edge_prob": params.edge_prob,
                "negative_prob": params.negative_prob,
                "weight_low": params.weight_low,
                "weight_high": params.weight_high,
                "seed": spec.seed,
                "regularize": spec.regularize,
            });
            Ok((g, Some(meta)))
        }
    }
}

fn profile(cfg: &ExperimentConfig, n: usize) -> CliResult<NonlinearityProfile> {
    let spec = cfg.profile.clone().unwrap_or_default();
    Ok(NonlinearityProfile::uniform(
        spec.build().op("nonlinearity::make_profile")?,
        n,
    ))
}

fn initial_state(cfg: &ExperimentConfig, n: usize) -> CliResult<Vec<f64>> {
    let spec = cfg.x0.as_deref().unwrap_or("random");
    match spec {
        "zero" => Ok(vec![0.0; n]),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
            Ok((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(Error::from)
                .op("cli::x0")?;
            let x: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| Error::Parse {
                    context: path.to_string(),
                    message: e.to_string(),
                })
                .op("cli::x0")?;
            if x.len() != n {
                return Err(Failure {
                    op: "cli::x0",
                    error: Error::ProfileSize {
                        expected: n,
                        got: x.len(),
                    },
                });
            }
            Ok(x)
        }
    }
}

fn compute_frustration(cfg: &ExperimentConfig, g: &SignedGraph) -> CliResult<FrustrationResult> {
    let cap = cfg.exact_cap.unwrap_or(EXACT_CAP);
    let restarts = cfg.restarts.unwrap_or(64);
    let seed = cfg.seed.unwrap_or(0);
    match cfg.exact {
        Some(true) => frustration_exact_with_cap(g, cap).op("frustration::frustration_exact"),
        Some(false) => {
            frustration_heuristic(g, restarts, seed).op("frustration::frustration_heuristic")
        }
        None => frustration_auto(g, cap, restarts, seed).op("frustration::frustration"),
    }
}

fn require<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure {
        op: "cli::config",
        error: Error::Config(format!("missing `{name}`")),
    })
}

fn newton_opts(cfg: &ExperimentConfig) -> EquilibriumOptions {
    let d = EquilibriumOptions::default();
    EquilibriumOptions {
        n_seeds: cfg.seeds.unwrap_or(d.n_seeds),
        seed: cfg.seed.unwrap_or(0),
        newton_tol: cfg.tolerances.newton_tol.unwrap_or(d.newton_tol),
        dedup_radius: cfg.tolerances.dedup_radius.unwrap_or(d.dedup_radius),
        ..d
    }
}

fn sweep_opts(cfg: &ExperimentConfig) -> SweepOptions {
    let d = SweepOptions::default();
    SweepOptions {
        seeds_per_point: cfg.seeds.unwrap_or(d.seeds_per_point),
        seed: cfg.seed.unwrap_or(0),
        newton_tol: cfg.tolerances.newton_tol.unwrap_or(d.newton_tol),
        dedup_radius: cfg.tolerances.dedup_radius.unwrap_or(d.dedup_radius),
        dt_tol: cfg.tolerances.dt_tol.unwrap_or(d.dt_tol),
        dt_max_iters: cfg.iters.unwrap_or(d.dt_max_iters),
        ..d
    }
}

/// Compact decimal for summaries: at most ten decimals, trailing zeros cut.
pub fn short(v: f64) -> String {
    if !v.is_finite() {
        return fmt_f64(v);
    }
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn short_list(v: &[f64]) -> String {
    let items: Vec<String> = if v.len() <= 12 {
        v.iter().map(|&x| short(x)).collect()
    } else {
        let mut head: Vec<String> = v[..3].iter().map(|&x| short(x)).collect();
        head.push("...".into());
        head.extend(v[v.len() - 3..].iter().map(|&x| short(x)));
        head
    };
    format!("({})", items.join(", "))
}

fn threshold_lines(s: &SpectralSummary) -> String {
    let mut out = format!("lambda = {}\n", short_list(&s.eigenvalues));
    out += &format!(
        "pi1 = {}, pi2 = {}\n",
        short(s.pi1),
        s.pi2.map_or("inf".to_string(), short)
    );
    if let (Some(p), Some(e)) = (s.pi1d, s.eps_step) {
        out += &format!("pi1d = {} (eps_step = {})\n", short(p), short(e));
    }
    out
}

#[derive(Debug, Serialize)]
struct AnalyzeReport<'a> {
    n: usize,
    edges: usize,
    balanced: bool,
    balancing_signature: Option<Vec<i8>>,
    degree_regular: bool,
    spectrum: &'a SpectralSummary,
    frustration: &'a FrustrationResult,
    bound: &'a BoundReport,
    step_regime: Option<StepRegime>,
    first_bifurcation: Option<FirstBifurcation>,
}

#[derive(Debug, Serialize)]
struct SimulateCtReport<'a> {
    pi: f64,
    horizon: f64,
    step: f64,
    converged: bool,
    final_time: f64,
    final_state: &'a [f64],
    equilibria: &'a EquilibriumSet,
}

#[derive(Debug, Clone, Serialize)]
struct EnsembleRow {
    index: usize,
    seed: u64,
    beta: f64,
    n: usize,
    edges: usize,
    balanced: bool,
    lambda1: f64,
    lambda2: f64,
    lambda_n: f64,
    pi1: f64,
    pi2: Option<f64>,
    pi1d: Option<f64>,
    frustration: f64,
    exact: bool,
    bound_upper: f64,
    bound_holds: bool,
    first_bifurcation: Option<FirstBifurcation>,
}

#[derive(Debug, Serialize)]
struct EnsembleReport<'a> {
    spec: &'a EnsembleSpec,
    eps_step: Option<f64>,
    count: usize,
    bound_holds: usize,
    balanced: usize,
    rows: &'a [EnsembleRow],
}

/// Executes a resolved config and writes its declared outputs.
pub fn run(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let mode = require(cfg.mode, "mode")?;
    let mut report = RunReport::default();
    match mode {
        Mode::Gen => {
            let (g, meta) = load_graph(cfg)?;
            let text = write_graph_json(&g, meta);
            report.summary = format!(
                "generated graph: n = {}, edges = {}, balanced = {}\n",
                g.n(),
                g.edge_count(),
                g.is_structurally_balanced()
            );
            match &cfg.outputs.graph {
                Some(p) => write_file(p, text.as_bytes(), &mut report)?,
                None => report.stdout_payload = Some(text),
            }
        }
        Mode::Analyze => {
            let (g, _) = load_graph(cfg)?;
            let s = thresholds(&g, cfg.eps_step).op("spectra::thresholds")?;
            let fr = compute_frustration(cfg, &g)?;
            let bound = bound_report(&g, &s, &fr).op("frustration::check_pi1_bounds")?;
            let bal = g.structural_balance();
            let first = match cfg.eps_step {
                Some(e) if step_regime(&g, e).contractive => Some(
                    classify_first_bifurcation(&s).op("dynamics_dt::classify_first_bifurcation")?,
                ),
                _ => None,
            };
            let rep = AnalyzeReport {
                n: g.n(),
                edges: g.edge_count(),
                balanced: bal.balanced,
                balancing_signature: bal.signature.map(|s| s.as_slice().to_vec()),
                degree_regular: g.is_degree_regular(1e-9),
                spectrum: &s,
                frustration: &fr,
                bound: &bound,
                step_regime: cfg.eps_step.map(|e| step_regime(&g, e)),
                first_bifurcation: first,
            };
            let mut text = format!(
                "graph: n = {}, edges = {}, balanced = {}, degree-regular = {}\n",
                rep.n, rep.edges, rep.balanced, rep.degree_regular
            );
            text += &threshold_lines(&s);
            text += &format!(
                "frustration = {} ({})\n",
                short(fr.value),
                if fr.exact { "exact" } else { "heuristic" }
            );
            text +=
                &format!(
                "bound: 1 <= pi1 = {} <= min{{n/(n-2*frustration) = {}, pi2 = {}}} = {}: {}{}\n",
                short(bound.pi1),
                short(bound.frustration_bound),
                bound.pi2.map_or("inf".into(), short),
                short(bound.upper),
                if bound.holds { "holds" } else { "VIOLATED" },
                if bound.symmetric_l { "" } else { " (degrees not constant: advisory)" }
            );
            if let Some(f) = first {
                text += &match f {
                    FirstBifurcation::Pitchfork { at } => {
                        format!("first bifurcation: pitchfork at pi = {}\n", short(at))
                    }
                    FirstBifurcation::PeriodDoubling { at } => {
                        format!("first bifurcation: period doubling at pi = {}\n", short(at))
                    }
                    FirstBifurcation::Degenerate { at } => {
                        format!("first bifurcation: degenerate at pi = {}\n", short(at))
                    }
                };
            }
            report.summary = text;
            if let Some(p) = &cfg.outputs.json {
                write_file(p, to_json_string(&rep).as_bytes(), &mut report)?;
            }
        }
        Mode::Frustration => {
            let (g, _) = load_graph(cfg)?;
            let fr = compute_frustration(cfg, &g)?;
            #[derive(Serialize)]
            struct Out<'a> {
                value: f64,
                signature: &'a [i8],
                exact: bool,
                restarts: usize,
            }
            let text = to_json_string(&Out {
                value: fr.value,
                signature: fr.signature.as_slice(),
                exact: fr.exact,
                restarts: fr.restarts,
            });
            report.summary = format!(
                "frustration = {} ({})\n",
                short(fr.value),
                if fr.exact { "exact" } else { "heuristic" }
            );
            match &cfg.outputs.json {
                Some(p) => write_file(p, text.as_bytes(), &mut report)?,
                None => report.stdout_payload = Some(text),
            }
        }
        Mode::SimulateCt => {
            let (g, _) = load_graph(cfg)?;
            let p = profile(cfg, g.n())?;
            let pi = require(cfg.pi, "pi")?;
            let horizon = cfg.horizon.unwrap_or(200.0);
            let h = cfg.step.unwrap_or(0.01);
            let x0 = initial_state(cfg, g.n())?;
            let opts = IntegrateOptions {
                stop_tol: Some(cfg.tolerances.stop_tol.unwrap_or(1e-10)),
                ..Default::default()
            };
            let traj = integrate(&g, &p, pi, &x0, horizon, h, opts).op("dynamics_ct::integrate")?;
            let set = find_equilibria(&g, &p, pi, &newton_opts(cfg))
                .op("dynamics_ct::find_equilibria")?;
            let fin = traj.final_state();
            let mut text = format!(
                "pi = {}: t = {}, converged = {}, |x|_inf = {}\n",
                short(pi),
                short(traj.final_time()),
                traj.converged,
                short(fin.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            );
            text += &format!("equilibria found: {}\n", set.len());
            for (k, r) in set.records.iter().enumerate() {
                text += &format!(
                    "  #{k}: |x|_1 = {}, {}\n",
                    short(r.norm1),
                    r.stability.map_or("unknown", |s| s.as_str())
                );
            }
            report.summary = text;
            if let Some(path) = &cfg.outputs.csv {
                let mut buf = Vec::new();
                traj.write_csv(&mut buf).op("dynamics_ct::integrate")?;
                write_file(path, &buf, &mut report)?;
            }
            if let Some(path) = &cfg.outputs.json {
                let rep = SimulateCtReport {
                    pi,
                    horizon,
                    step: h,
                    converged: traj.converged,
                    final_time: traj.final_time(),
                    final_state: fin,
                    equilibria: &set,
                };
                write_file(path, to_json_string(&rep).as_bytes(), &mut report)?;
            }
        }
        Mode::SimulateDt => {
            let (g, _) = load_graph(cfg)?;
            let p = profile(cfg, g.n())?;
            let pi = require(cfg.pi, "pi")?;
            let eps = cfg.eps_step.unwrap_or(0.3);
            let s = thresholds(&g, Some(eps)).op("spectra::thresholds")?;
            let iters = cfg.iters.unwrap_or(10_000);
            let tol = cfg.tolerances.dt_tol.unwrap_or(1e-10);
            let x0 = initial_state(cfg, g.n())?;
            let out: DtOutcome =
                simulate(&g, &p, pi, eps, &x0, iters, tol).op("dynamics_dt::simulate")?;
            let regime = step_regime(&g, eps);
            let mut text = format!(
                "pi = {}, eps_step = {} (eps*max_degree = {}): {} after {} iterations",
                short(pi),
                short(eps),
                short(regime.eps_max_degree),
                out.kind.as_str(),
                out.iterations
            );
            if out.partner.is_some() {
                text += &format!(", amplitude = {}", short(out.amplitude));
            }
            text += "\n";
            text += &threshold_lines(&s);
            if let Some(v) = out.necessary_condition_violation(&s) {
                text += &format!("WARNING: {v}\n");
            }
            report.summary = text;
            if let Some(path) = &cfg.outputs.csv {
                let states =
                    iterate(&g, &p, pi, eps, &x0, out.iterations).op("dynamics_dt::simulate")?;
                let times: Vec<f64> = (0..states.len()).map(|k| k as f64 * eps).collect();
                let mut buf = Vec::new();
                crate::dynamics_ct::write_state_csv(&mut buf, "t", &times, &states)
                    .op("dynamics_dt::simulate")?;
                write_file(path, &buf, &mut report)?;
            }
            if let Some(path) = &cfg.outputs.json {
                write_file(path, to_json_string(&out).as_bytes(), &mut report)?;
            }
        }
        Mode::SweepCt | Mode::SweepDt => {
            let (g, _) = load_graph(cfg)?;
            let p = profile(cfg, g.n())?;
            let grid = match &cfg.grid {
                Some(s) => PiGrid::parse(s).op("sweep::grid")?,
                None if mode == Mode::SweepCt => PiGrid::ct_default(),
                None => PiGrid::dt_default(),
            };
            let opts = sweep_opts(cfg);
            let r = if mode == Mode::SweepCt {
                sweep_ct(&g, &p, &grid, &opts).op("sweep::sweep_ct")?
            } else {
                let eps = cfg.eps_step.unwrap_or(0.3);
                sweep_dt(&g, &p, &grid, eps, &opts).op("sweep::sweep_dt")?
            };
            let sum = r.summary();
            let mut text = format!(
                "{} sweep over {} points in [{}, {}], {} branches\n",
                mode.as_str(),
                sum.grid_points,
                short(sum.pi_min),
                short(sum.pi_max),
                sum.branches
            );
            text += &threshold_lines(&r.thresholds);
            let fmt_onset = |o: Option<crate::sweep::Onset>| {
                o.map_or("none".to_string(), |o| {
                    format!("{} +- {}", short(o.value), short(0.5 * o.error_bound))
                })
            };
            text += &format!(
                "onsets: nontrivial = {}, multi = {}, cycle = {}\n",
                fmt_onset(r.onsets.nontrivial),
                fmt_onset(r.onsets.multi),
                fmt_onset(r.onsets.cycle)
            );
            if !r.violations.is_empty() {
                text += &format!(
                    "WARNING: {} necessary-condition violations\n",
                    r.violations.len()
                );
            }
            report.summary = text;
            if let Some(path) = &cfg.outputs.csv {
                let mut buf = Vec::new();
                r.write_csv(&mut buf).op("sweep::write_csv")?;
                write_file(path, &buf, &mut report)?;
            }
            if let Some(path) = &cfg.outputs.json {
                write_file(path, to_json_string(&sum).as_bytes(), &mut report)?;
            }
        }
        Mode::Ensemble => {
            let spec = cfg.ensemble.clone().ok_or_else(|| Failure {
                op: "cli::config",
                error: Error::Config("missing `ensemble`".into()),
            })?;
            if spec.betas.is_empty() {
                return Err(Failure {
                    op: "cli::config",
                    error: Error::Config("ensemble needs at least one beta".into()),
                });
            }
            let base = cfg.seed.unwrap_or(0);
            let rows: Vec<EnsembleRow> = (0..spec.count)
                .into_par_iter()
                .map(|k| -> CliResult<EnsembleRow> {
                    let beta = spec.betas[k % spec.betas.len()];
                    let mut params = RandomGraphParams::new(spec.n, spec.edge_prob, beta);
                    if let Some(v) = spec.weight_low {
                        params.weight_low = v;
                    }
                    if let Some(v) = spec.weight_high {
                        params.weight_high = v;
                    }
                    let seed = base.wrapping_add(k as u64);
                    let mut g =
                        random_signed_graph(&params, seed).op("graph::random_signed_graph")?;
                    if let Some(t) = spec.regularize {
                        g = g
                            .regularize_degrees(t, REGULARIZE_TOL, REGULARIZE_MAX_ITER)
                            .op("graph::regularize_degrees")?;
                    }
                    let eps = cfg.eps_step.filter(|e| e * g.max_degree() < 2.0);
                    let s = thresholds(&g, eps).op("spectra::thresholds")?;
                    let fr = compute_frustration(cfg, &g)?;
                    let b = bound_report(&g, &s, &fr).op("frustration::check_pi1_bounds")?;
                    let first = match eps {
                        Some(e) if e * g.max_degree() <= 1.0 => Some(
                            classify_first_bifurcation(&s)
                                .op("dynamics_dt::classify_first_bifurcation")?,
                        ),
                        _ => None,
                    };
                    Ok(EnsembleRow {
                        index: k,
                        seed,
                        beta,
                        n: g.n(),
                        edges: g.edge_count(),
                        balanced: g.is_structurally_balanced(),
                        lambda1: s.lambda1,
                        lambda2: s.lambda2,
                        lambda_n: s.lambda_n,
                        pi1: s.pi1,
                        pi2: s.pi2,
                        pi1d: s.pi1d,
                        frustration: fr.value,
                        exact: fr.exact,
                        bound_upper: b.upper,
                        bound_holds: b.holds,
                        first_bifurcation: first,
                    })
                })
                .collect::<CliResult<_>>()?;
            let holds = rows.iter().filter(|r| r.bound_holds).count();
            let balanced = rows.iter().filter(|r| r.balanced).count();
            report.summary = format!(
                "ensemble of {} graphs (n = {}, p = {}): {} balanced, bound holds on {}/{}\n",
                rows.len(),
                spec.n,
                short(spec.edge_prob),
                balanced,
                holds,
                rows.len()
            );
            if let Some(path) = &cfg.outputs.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
                w.write_record([
                    "index",
                    "seed",
                    "beta",
                    "n",
                    "edges",
                    "balanced",
                    "lambda1",
                    "lambda2",
                    "lambda_n",
                    "pi1",
                    "pi2",
                    "pi1d",
                    "frustration",
                    "exact",
                    "bound_upper",
                    "bound_holds",
                ])
                .map_err(io)
                .op("cli::ensemble")?;
                for r in &rows {
                    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
                    w.write_record([
                        r.index.to_string(),
                        r.seed.to_string(),
                        fmt_f64(r.beta),
                        r.n.to_string(),
                        r.edges.to_string(),
                        r.balanced.to_string(),
                        fmt_f64(r.lambda1),
                        fmt_f64(r.lambda2),
                        fmt_f64(r.lambda_n),
                        fmt_f64(r.pi1),
                        r.pi2.map_or("inf".into(), fmt_f64),
                        opt(r.pi1d),
                        fmt_f64(r.frustration),
                        r.exact.to_string(),
                        fmt_f64(r.bound_upper),
                        r.bound_holds.to_string(),
                    ])
                    .map_err(io)
                    .op("cli::ensemble")?;
                }
                let buf = w
                    .into_inner()
                    .map_err(|e| Error::Io(e.into_error()))
                    .op("cli::ensemble")?;
                write_file(path, &buf, &mut report)?;
            }
            if let Some(path) = &cfg.outputs.json {
                let rep = EnsembleReport {
                    spec: &spec,
                    eps_step: cfg.eps_step,
                    count: rows.len(),
                    bound_holds: holds,
                    balanced,
                    rows: &rows,
                };
                write_file(path, to_json_string(&rep).as_bytes(), &mut report)?;
            }
        }
    }
    Ok(report)
}

/// Parses arguments, runs, prints, and returns the process exit status
/// (0 success, 2 input or config error, 3 numerical failure).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(j) = cli.jobs.filter(|&j| j > 0) {
        // A second initialization (e.g. in tests) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    let result = cli.command.into_config().and_then(|cfg| run(&cfg));
    match result {
        Ok(rep) => {
            if let Some(payload) = &rep.stdout_payload {
                print!("{payload}");
            } else {
                print!("{}", rep.summary);
            }
            for p in &rep.written {
                eprintln!("wrote {}", p.display());
            }
            0
        }
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
