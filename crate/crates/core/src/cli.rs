//! Command-line dispatch. Exit codes: 0 success, 2 failed verification,
//! 1 usage or engine error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::amplitudes::{amplitude, diffraction_orders, AmplitudeRow, ScatteringTask};
use crate::born::born_table;
use crate::config::{ConstructSpec, RunConfig};
use crate::dynamics2d::{delta_transfer_matrix, transfer_matrix};
use crate::engine::EngineOptions;
use crate::error::{Error, Result};
use crate::grid::{build_grid_2d, CombLattice};
use crate::io::{amplitude_csv, order_csv, polar_svg, write_atomic};
use crate::lab::{self, EquivalenceReport, TaskSpec};
use crate::potentials::{construct_deformation_2d, construct_deformation_3d, Potential, Potential2D, Potential3D};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

const VERSION: &str = concat!("engine ", env!("CARGO_PKG_VERSION"), ", report schema 1");

#[derive(Debug, Parser)]
#[command(name = "xferscat", version = VERSION, about = "Transfer-matrix scattering of 2D and 3D potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Primary output: CSV table or potential JSON.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Verification report (JSON).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Polar plot of |f(θ)|.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Quadrature nodes of the 2D momentum grid.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Initial slice count.
    #[arg(long, global = true)]
    slices: Option<usize>,
    /// Slice refinement tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_doublings: Option<u32>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "XFERSCAT_THREADS")]
    threads: Option<usize>,
    /// Write the first momentum grid as JSON.
    #[arg(long, global = true)]
    dump_grid: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scattering amplitudes f(θ) from the transfer matrix.
    Amplitude,
    /// Diffraction orders of a δ-comb at one k, θ0 and side.
    Orders,
    /// First Born amplitudes.
    Born,
    /// Build a deformed or difference potential from the `construct` block.
    Construct,
    VerifyInvisibility,
    VerifyEquivalence,
    VerifyComb,
    Verify3d,
}

/// Parses `argv` and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            if code == EXIT_ERROR {
                eprintln!("{}", CONFIG_HELP);
            }
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            EXIT_ERROR
        }
    }
}

const CONFIG_HELP: &str = "config schema: {\"potentials\": [<potential JSON or path>], \"alpha\": a, \"k\": [..], \
\"sides\": [\"left\",\"right\"], \"theta0_deg\": [..], \"theta_grid\": {\"count\": n} | {\"degrees\": [..]}, \
\"engine\": {\"nodes\", \"slices\", \"tol\", \"max_doublings\", \"threads\", \"n_radial\", \"n_angular\", \"z_samples\"}, \
\"comb\": {\"n\", \"n_prime\"}, \"directions\": {\"random_pairs\", \"seed\", \"backscatter_probes\"}, \
\"construct\": {\"kind\": \"deformation2d\" | \"deformation3d\" | \"difference\", ..}}";

fn dispatch(cli: &Cli) -> Result<i32> {
    let path = cli.common.config.as_ref().ok_or_else(|| Error::invalid("--config is required"))?;
    let mut cfg = RunConfig::load(path)?;
    apply_overrides(&mut cfg, &cli.common);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.engine.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Amplitude => cmd_amplitude(&cfg, &cli.common, false),
        Command::Born => cmd_amplitude(&cfg, &cli.common, true),
        Command::Orders => cmd_orders(&cfg, &cli.common),
        Command::Construct => cmd_construct(&cfg, &cli.common),
        Command::VerifyInvisibility => verify(&cfg, &cli.common, Experiment::Invisibility),
        Command::VerifyEquivalence => verify(&cfg, &cli.common, Experiment::Equivalence),
        Command::VerifyComb => verify(&cfg, &cli.common, Experiment::Comb),
        Command::Verify3d => verify(&cfg, &cli.common, Experiment::ThreeD),
    })
}

fn apply_overrides(cfg: &mut RunConfig, c: &Common) {
    let e = &mut cfg.engine;
    if let Some(n) = c.nodes {
        e.nodes = n;
    }
    if c.slices.is_some() {
        e.slices = c.slices;
    }
    if let Some(t) = c.tol {
        e.tol = t;
    }
    if let Some(d) = c.max_doublings {
        e.max_doublings = d;
    }
    if c.threads.is_some() {
        e.threads = c.threads;
    }
}

fn engine_options(cfg: &RunConfig) -> EngineOptions {
    EngineOptions { slices: cfg.engine.slices, tol: cfg.engine.tol, max_doublings: cfg.engine.max_doublings }
}

fn task_specs(cfg: &RunConfig) -> Result<Vec<TaskSpec>> {
    let thetas = cfg.theta_grid.radians()?;
    Ok(cfg
        .theta0_deg
        .iter()
        .map(|t0| TaskSpec {
            theta0: t0.to_radians(),
            thetas: thetas.clone(),
            sides: cfg.sides.clone(),
            nodes: cfg.engine.nodes,
            engine: engine_options(cfg),
        })
        .collect())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dump_grid(c: &Common, k: f64, spec: &TaskSpec) -> Result<()> {
    if let Some(p) = &c.dump_grid {
        let grid = build_grid_2d(k, spec.nodes, spec.theta0, &spec.thetas)?;
        write_atomic(p, serde_json::to_string_pretty(&grid)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_amplitude(cfg: &RunConfig, c: &Common, born: bool) -> Result<i32> {
    let v = cfg.potential_2d(0, 1)?;
    let ks = cfg.ks()?;
    let specs = task_specs(cfg)?;
    dump_grid(c, ks[0], &specs[0])?;
    let jobs: Vec<(f64, &TaskSpec)> = ks.iter().flat_map(|&k| specs.iter().map(move |s| (k, s))).collect();
    let results: Vec<Vec<Vec<AmplitudeRow>>> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(k, spec)| amplitude_rows(&v, k, spec, born))
            .collect::<Result<_>>()?
    };
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for ((k, spec), per_side) in jobs.iter().zip(results) {
        for (side, r) in spec.sides.iter().zip(per_side) {
            series.push((format!("k={k} theta0={}deg {}", spec.theta0.to_degrees(), side.as_str()), r.clone()));
            rows.extend(r);
        }
    }
    write_or_print(c.out.as_deref(), &amplitude_csv(&rows))?;
    if let Some(p) = &c.svg {
        write_atomic(p, polar_svg(&series).as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn amplitude_rows(v: &Potential2D, k: f64, spec: &TaskSpec, born: bool) -> Result<Vec<Vec<AmplitudeRow>>> {
    if born {
        return spec
            .sides
            .iter()
            .map(|&side| {
                let task = ScatteringTask::new(k, side, spec.theta0, spec.thetas.clone())?;
                Ok(born_table(v, &task)?.rows)
            })
            .collect();
    }
    ScatteringTask::new(k, spec.sides[0], spec.theta0, spec.thetas.clone())?;
    let grid = build_grid_2d(k, spec.nodes, spec.theta0, &spec.thetas)?;
    let tm = transfer_matrix(v, &grid, None, &spec.engine)?;
    spec.sides.iter().map(|&s| Ok(amplitude(&tm, &grid, s, spec.engine.tol)?.rows)).collect()
}

fn single<T: Copy + std::fmt::Debug>(what: &str, xs: &[T]) -> Result<T> {
    match xs {
        [x] => Ok(*x),
        _ => Err(Error::invalid(format!("orders takes exactly one {what}, got {xs:?}"))),
    }
}

fn comb_frequency(v: &Potential2D) -> Result<f64> {
    match v {
        Potential2D::DeltaComb { lattice_frequency, .. } => Ok(*lattice_frequency),
        _ => Err(Error::UnsupportedFamily("the lattice backend takes a single DeltaComb")),
    }
}

fn cmd_orders(cfg: &RunConfig, c: &Common) -> Result<i32> {
    let v = cfg.potential_2d(0, 1)?;
    let k = single("k", cfg.ks()?)?;
    let theta0 = single("theta0_deg", &cfg.theta0_deg)?.to_radians();
    let side = single("side", &cfg.sides)?;
    let lat = CombLattice::new(k, k * theta0.sin(), comb_frequency(&v)?)?;
    let tm = delta_transfer_matrix(&v, &lat)?;
    write_or_print(c.out.as_deref(), &order_csv(&diffraction_orders(&tm, side)?))?;
    Ok(EXIT_OK)
}

fn cmd_construct(cfg: &RunConfig, c: &Common) -> Result<i32> {
    let spec = cfg.construct.as_ref().ok_or_else(|| Error::invalid("construct needs a `construct` block"))?;
    let out: Potential = match spec {
        ConstructSpec::Deformation2d { base, alpha, order, decay, amplitude, envelope } => {
            let base = match base {
                Some(b) => match cfg.resolve(b)? {
                    Potential::TwoD(p) => p,
                    Potential::ThreeD(_) => return Err(Error::DimensionMismatch),
                },
                None => Potential2D::zero(),
            };
            Potential::TwoD(construct_deformation_2d(&base, *alpha, *order, *decay, *amplitude, *envelope)?)
        }
        ConstructSpec::Deformation3d { base, alpha, amplitude_tilde, scales, orders } => {
            let base = match base {
                Some(b) => match cfg.resolve(b)? {
                    Potential::ThreeD(p) => p,
                    Potential::TwoD(Potential2D::Sum { members }) if members.is_empty() => Potential3D::zero(),
                    Potential::TwoD(_) => return Err(Error::DimensionMismatch),
                },
                None => Potential3D::zero(),
            };
            let [ax, ay, az] = *scales;
            let [nx, ny] = *orders;
            Potential::ThreeD(construct_deformation_3d(&base, *alpha, *amplitude_tilde, ax, ay, az, nx, ny)?)
        }
        ConstructSpec::Difference { v2, v1 } => Potential::difference(&cfg.resolve(v2)?, &cfg.resolve(v1)?)?,
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    write_or_print(c.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Invisibility,
    Equivalence,
    Comb,
    ThreeD,
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invisibility" => Ok(Experiment::Invisibility),
            "equivalence" => Ok(Experiment::Equivalence),
            "comb" | "comb-truncation" => Ok(Experiment::Comb),
            "3d" | "equivalence-3d" => Ok(Experiment::ThreeD),
            _ => Err(Error::invalid(format!("unknown experiment {s:?}"))),
        }
    }
}

/// Runs a verification experiment described by `cfg`, once per incidence
/// angle, and merges the reports.
pub fn run_experiment(cfg: &RunConfig, experiment: Experiment) -> Result<EquivalenceReport> {
    let ks = cfg.ks()?;
    let reports = match experiment {
        Experiment::Invisibility => {
            let v = cfg.potential_2d(0, 1)?;
            let alpha = cfg.alpha()?;
            task_specs(cfg)?.iter().map(|s| lab::run_invisibility(&v, alpha, ks, s)).collect::<Result<Vec<_>>>()?
        }
        Experiment::Equivalence => {
            let (v1, v2) = (cfg.potential_2d(0, 2)?, cfg.potential_2d(1, 2)?);
            let alpha = cfg.alpha()?;
            task_specs(cfg)?
                .iter()
                .map(|s| lab::run_equivalence(&v1, &v2, alpha, ks, s))
                .collect::<Result<Vec<_>>>()?
        }
        Experiment::Comb => {
            let v = cfg.potential_2d(0, 1)?;
            let Potential2D::DeltaComb { coefficients, lattice_frequency } = &v else {
                return Err(Error::UnsupportedFamily("comb truncation takes a single DeltaComb"));
            };
            let comb = cfg.comb.as_ref().ok_or_else(|| Error::invalid("needs a `comb` block with n and n_prime"))?;
            cfg.theta0_deg
                .iter()
                .map(|t0| {
                    let t0 = t0.to_radians();
                    lab::run_comb_truncation(coefficients, *lattice_frequency, comb.n, comb.n_prime, ks, t0, &cfg.sides)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Experiment::ThreeD => {
            let (v1, v2) = (cfg.potential_3d(0, 2)?, cfg.potential_3d(1, 2)?);
            vec![lab::run_equivalence_3d(&v1, &v2, cfg.alpha()?, ks, &cfg.directions.spec(), &cfg.grid_3d())?]
        }
    };
    EquivalenceReport::merge(reports)
}

fn verify(cfg: &RunConfig, c: &Common, experiment: Experiment) -> Result<i32> {
    if experiment != Experiment::Comb && experiment != Experiment::ThreeD {
        dump_grid(c, cfg.ks()?[0], &task_specs(cfg)?[0])?;
    }
    finish_report(run_experiment(cfg, experiment)?, c)
}

fn finish_report(report: EquivalenceReport, c: &Common) -> Result<i32> {
    let mut json = report.to_json();
    json.push('\n');
    match c.report.as_ref().or(c.out.as_ref()) {
        Some(p) => write_atomic(p, json.as_bytes())?,
        None => print!("{json}"),
    }
    for e in &report.entries {
        eprintln!(
            "{} k={} side={} rel_dev={:.3e} regime={:?} verdict={:?}",
            report.experiment,
            e.k,
            e.side.map_or("-", |s| s.as_str()),
            e.rel_dev,
            e.regime,
            e.verdict
        );
    }
    eprintln!("{}: {}", report.experiment, if report.pass { "PASS" } else { "FAIL" });
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}
