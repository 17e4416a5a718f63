//! Command-line front end for the `pmean` binary.
//!
//! Exit codes: 0 success, 1 usage error, 2 computational failure. Products
//! go to `--out` (or standard output); warnings go to standard error. When
//! `--out` is given a manifest is written next to the product, and passing
//! it back with `--config` replays the run.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{parse_matrix, parse_vector, Format, GridSpec, Manifest, Numbers, OutputSpec, RunConfig};

use crate::criteria::{default_certify_grid, skew_verdict, VerdictOptions};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::mv::{colinearity_score, sample_mvsn, trajectory_with, MVSNSpec, TrajectoryOptions};
use crate::piecewise::counterexample_report;
use crate::pmean::{trace_curve_with, PDomain, PMeanCurve};

#[derive(Debug, Parser)]
#[command(name = "pmean", version, about = "Fréchet p-means and true-skewness certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace p ↦ ν_p on a grid and write `p,nu,dnu_sign,dnu_dp,residual`.
    Curve(CurveArgs),
    /// Run the criteria pipeline and write the verdict as JSON.
    Verdict(VerdictArgs),
    /// Sum of two decreasing step densities that is not truly skewed.
    Counterexample(CounterexampleArgs),
    /// Multivariate skew-normal p-mean trajectory and tangent directions.
    Mvsn(MvsnArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run config or manifest; its values override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path (a directory for `mvsn`); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Distribution, e.g. `weibull(k=3,lambda=1)`, or a piecewise JSON file.
    #[arg(long)]
    pub dist: Option<String>,
    /// p grid as `start:stop:step` or `p1,p2,...`; default `1:6:0.5`.
    #[arg(long)]
    pub p: Option<String>,
    /// Relative tolerance of each root solve; default 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerdictArgs {
    /// Distribution in the same forms as for `curve`.
    #[arg(long)]
    pub dist: Option<String>,
    /// Grid for numeric certification; defaults to step 0.5 on [1, 6].
    #[arg(long)]
    pub p: Option<String>,
    /// Smallest admitted slope dν/dp in numeric certification.
    #[arg(long)]
    pub min_slope: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Density height on [0, 1); must lie in (1/2, 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MvsnArgs {
    /// Skewness vector, e.g. `5,5`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Location vector; zero by default.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Scale matrix as rows `a,b;c,d`; identity by default.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Sample size; default 100000.
    #[arg(long)]
    pub n: Option<usize>,
    /// RNG seed; default 1.
    #[arg(long)]
    pub seed: Option<u64>,
    /// p grid; default `1:4:0.5`.
    #[arg(long)]
    pub p: Option<String>,
    /// Gradient tolerance of the p-mean solves; default 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Points per axis of the density grid.
    #[arg(long)]
    pub density_grid: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_exit_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 1 for errors in what the user asked for, 2 for failures of the computation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Domain(_) | Error::Parse { .. } | Error::Precondition(_) | Error::Json(_) => 1,
        Error::Bracket(_)
        | Error::Accuracy { .. }
        | Error::Integrand { .. }
        | Error::Optimization(_)
        | Error::Undefined(_)
        | Error::Curve(_)
        | Error::Io(_) => 2,
    }
}

fn resolve(name: &str, flags: RunConfig, common: &Common) -> Result<RunConfig> {
    let mut cfg = flags;
    cfg.command = Some(name.to_string());
    if common.out.is_some() || common.format.is_some() {
        cfg.output = Some(OutputSpec {
            path: common.out.clone(),
            format: common.format,
        });
    }
    if let Some(path) = &common.config {
        let file = RunConfig::load(path)?;
        if let Some(c) = &file.command {
            if c != name {
                return Err(Error::InvalidParameter(format!("config is for `{c}`, not `{name}`")));
            }
        }
        cfg = cfg.overlay(&file);
    }
    Ok(cfg)
}

fn grid_flag(text: &Option<String>) -> Result<Option<GridSpec>> {
    text.as_deref().map(GridSpec::parse).transpose()
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Curve(a) => {
            let flags = RunConfig {
                distribution: a.dist,
                p_grid: grid_flag(&a.p)?,
                tol: a.tol,
                ..Default::default()
            };
            cmd_curve(&resolve("curve", flags, &a.common)?)
        }
        Command::Verdict(a) => {
            let flags = RunConfig {
                distribution: a.dist,
                p_grid: grid_flag(&a.p)?,
                min_slope: a.min_slope,
                ..Default::default()
            };
            cmd_verdict(&resolve("verdict", flags, &a.common)?)
        }
        Command::Counterexample(a) => {
            let flags = RunConfig {
                lambda: a.lambda.map(Numbers::One),
                ..Default::default()
            };
            cmd_counterexample(&resolve("counterexample", flags, &a.common)?)
        }
        Command::Mvsn(a) => {
            let flags = RunConfig {
                lambda: a.lambda.as_deref().map(parse_vector).transpose()?.map(Numbers::Many),
                mu: a.mu.as_deref().map(parse_vector).transpose()?,
                sigma: a.sigma.as_deref().map(parse_matrix).transpose()?,
                n: a.n,
                seed: a.seed,
                p_grid: grid_flag(&a.p)?,
                tol: a.tol,
                density_grid: a.density_grid,
                ..Default::default()
            };
            cmd_mvsn(&resolve("mvsn", flags, &a.common)?)
        }
    }
}

fn write_product(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(path: &Path, config: &RunConfig, results: serde_json::Value, notes: Vec<String>) -> Result<()> {
    let m = Manifest {
        config: config.clone(),
        results,
        notes,
    };
    fs::write(path, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

/// CSV of a traced curve: `p,nu,dnu_sign,dnu_dp,residual`.
pub fn curve_csv(curve: &PMeanCurve) -> String {
    let mut out = String::from("p,nu,dnu_sign,dnu_dp,residual\n");
    for q in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(q.p),
            fmt_f64(q.nu),
            q.dnu_sign.as_str(),
            q.dnu_dp.map(fmt_f64).unwrap_or_default(),
            fmt_f64(q.balance_residual)
        ));
    }
    out
}

/// Clips the grid to the default p-domain cap, warning about dropped points.
fn clipped_grid(spec: &crate::dist::DistributionSpec, grid: &[f64]) -> Result<Vec<f64>> {
    let (kept, warning) = PDomain::for_spec(spec).clip(grid);
    if let Some(w) = warning {
        eprintln!("{w}");
    }
    if kept.is_empty() {
        return Err(Error::Domain(format!("no grid point lies in the p-domain of {spec}")));
    }
    Ok(kept)
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.distribution()?;
    let mut cfg = cfg.clone();
    let grid = cfg.p_grid.get_or_insert(GridSpec::Range {
        start: 1.0,
        stop: 6.0,
        step: 0.5,
    });
    let grid = clipped_grid(&spec, &grid.points()?)?;
    let curve = trace_curve_with(&spec, &grid, *cfg.tol.get_or_insert(1e-10))?;
    for (p, why) in &curve.failures {
        eprintln!("warning: solve failed at p = {p}: {why}");
    }
    let text = match cfg.format().unwrap_or(Format::Csv) {
        Format::Csv => curve_csv(&curve),
        Format::Json => serde_json::to_string_pretty(&curve)? + "\n",
    };
    write_product(cfg.out_path(), &text)?;
    if let Some(out) = cfg.out_path() {
        let results = json!({ "distribution": curve.distribution, "grid": curve.grid, "failures": curve.failures.len() });
        write_manifest(&manifest_path(out), &cfg, results, Vec::new())?;
    }
    if let Some((p, why)) = curve.failures.first() {
        return Err(Error::Curve(format!("{} point(s) failed, first at p = {p}: {why}", curve.failures.len())));
    }
    Ok(())
}

pub fn cmd_verdict(cfg: &RunConfig) -> Result<()> {
    if cfg.format() == Some(Format::Csv) {
        return Err(Error::InvalidParameter("verdicts are written as JSON".into()));
    }
    let spec = cfg.distribution()?;
    let grid = match &cfg.p_grid {
        Some(g) => Some(clipped_grid(&spec, &g.points()?)?),
        None => None,
    };
    let opts = VerdictOptions {
        grid,
        min_slope: cfg.min_slope.unwrap_or(0.0),
        ..Default::default()
    };
    let v = skew_verdict(&spec, &opts)?;
    write_product(cfg.out_path(), &(v.to_json()? + "\n"))?;
    if let Some(out) = cfg.out_path() {
        let grid = match &opts.grid {
            Some(g) => g.clone(),
            None => default_certify_grid(&spec).unwrap_or_default(),
        };
        let results = json!({ "conclusion": v.conclusion.as_str(), "grade": v.grade, "grid": grid });
        write_manifest(&manifest_path(out), cfg, results, Vec::new())?;
    }
    Ok(())
}

pub fn cmd_counterexample(cfg: &RunConfig) -> Result<()> {
    if cfg.format() == Some(Format::Csv) {
        return Err(Error::InvalidParameter("the counterexample report is written as JSON".into()));
    }
    let lambda = match cfg.lambda.as_ref().map(Numbers::to_vec).as_deref() {
        Some([l]) => *l,
        Some(_) => return Err(Error::InvalidParameter("--lambda takes a single number".into())),
        None => return Err(Error::InvalidParameter("missing --lambda".into())),
    };
    let r = counterexample_report(lambda)?;
    write_product(cfg.out_path(), &(serde_json::to_string_pretty(&r)? + "\n"))?;
    if let Some(out) = cfg.out_path() {
        let results = json!({
            "median": r.median,
            "sign_difference": r.sign_difference,
            "sum_breaks_skewness": r.sum_breaks_skewness(),
        });
        write_manifest(&manifest_path(out), cfg, results, Vec::new())?;
    }
    Ok(())
}

pub fn cmd_mvsn(cfg: &RunConfig) -> Result<()> {
    if cfg.format() == Some(Format::Json) {
        return Err(Error::InvalidParameter("mvsn trajectories are written as CSV".into()));
    }
    let lambda = cfg
        .lambda
        .as_ref()
        .map(Numbers::to_vec)
        .ok_or_else(|| Error::InvalidParameter("missing --lambda".into()))?;
    let k = lambda.len();
    let mut notes = Vec::new();
    if cfg.mu.is_none() && cfg.sigma.is_none() {
        notes.push("mu and sigma not given; using mu = 0 and sigma = I".to_string());
    }
    let mu = cfg.mu.clone().unwrap_or_else(|| vec![0.0; k]);
    let sigma = cfg
        .sigma
        .clone()
        .unwrap_or_else(|| (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect());
    let spec = MVSNSpec::new(mu, sigma, lambda.clone())?;
    // every default is written back so the manifest replays exactly
    let mut cfg = cfg.clone();
    cfg.mu = Some(spec.mu.clone());
    cfg.sigma = Some(spec.sigma.clone());
    let n = *cfg.n.get_or_insert(100_000);
    let seed = *cfg.seed.get_or_insert(1);
    let grid = cfg
        .p_grid
        .get_or_insert(GridSpec::Range {
            start: 1.0,
            stop: 4.0,
            step: 0.5,
        })
        .points()?;
    let opts = TrajectoryOptions {
        tol: *cfg.tol.get_or_insert(TrajectoryOptions::default().tol),
        ..Default::default()
    };
    let sample = sample_mvsn(&spec, n, seed)?;
    let traj = trajectory_with(&sample, &grid, opts)?;

    let score = if lambda.iter().all(|l| *l == 0.0) {
        None
    } else {
        colinearity_score(&traj, &lambda).ok()
    };
    let reliable = traj.reliable_tangents().count();
    if reliable == 0 {
        notes.push("symmetric: no tangent exceeds its noise level, tangents omitted".to_string());
    }
    for e in traj.entries.iter().filter(|e| !e.converged) {
        eprintln!("warning: optimizer did not converge at p = {}", e.p);
    }
    match score {
        Some(s) => eprintln!("colinearity with lambda: {}", fmt_f64(s)),
        None => eprintln!("colinearity with lambda: undefined ({reliable} reliable tangents)"),
    }

    let Some(dir) = cfg.out_path().map(Path::to_path_buf) else {
        return write_product(None, &traj.to_csv());
    };
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("trajectory.csv"), traj.to_csv())?;
    if k == 2 {
        let m = *cfg.density_grid.get_or_insert(101);
        let half = |i: usize| 4.0 * spec.sigma[i][i].sqrt();
        let rows = spec.density_grid(
            (spec.mu[0] - half(0), spec.mu[0] + half(0)),
            (spec.mu[1] - half(1), spec.mu[1] + half(1)),
            m,
        )?;
        let mut text = String::from("x,y,density\n");
        for r in rows {
            text.push_str(&format!("{},{},{}\n", fmt_f64(r[0]), fmt_f64(r[1]), fmt_f64(r[2])));
        }
        fs::write(dir.join("density.csv"), text)?;
    } else {
        notes.push(format!("density grid skipped: dimension {k} is not 2"));
    }
    let results = json!({
        "colinearity_with_lambda": score,
        "reliable_tangents": reliable,
        "sample_size": n,
        "seed": seed,
        "trajectory": traj,
    });
    write_manifest(&dir.join("manifest.json"), &cfg, results, notes)
}
