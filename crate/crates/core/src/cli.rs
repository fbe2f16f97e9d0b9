//! The `kerrslab` command line: `solve`, `sweep`, `check` and `validate`.
//!
//! Data files (`<stem>.solution.json`, `<stem>.profile.csv`, `<stem>.sweep.csv`,
//! `<stem>.check.json`, `<stem>.validate.json`) depend only on the
//! configuration. Timing and environment go to `<stem>.<command>.meta.json`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 solver did not
//! converge, 3 no solvability condition holds, 4 validation failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OutputKind, RunConfig};
use crate::contraction::{check_all, check_complex_case, check_real_case, SolvabilityReport};
use crate::model::{FieldSolution, ProblemParams};
use crate::operators::KernelConvention;
use crate::solver::{flux_balance, solve, FluxBalance, IterationTrace, Scheme};
use crate::validate::run_validation;

pub const SOLUTION_SCHEMA: &str = "kerrslab.solution/v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_UNSATISFIED: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kerrslab", version, about = "Plane-wave diffraction by a Kerr-nonlinear dielectric layer")]
pub struct Cli {
    /// Override the grid node count from the config.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "KERRSLAB_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Suppress console output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration.
    Solve { config: PathBuf },
    /// Solve across a parameter range.
    Sweep { config: PathBuf },
    /// Evaluate the sufficient solvability conditions.
    Check { config: PathBuf },
    /// Compare against closed-form and boundary-value references.
    Validate { config: PathBuf },
}

#[derive(Debug, Clone)]
pub struct CliOptions {
    pub grid_n: Option<usize>,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

pub fn run(cli: Cli) -> i32 {
    let opts = CliOptions { grid_n: cli.grid_n, out_dir: cli.out, quiet: cli.quiet };
    match &cli.command {
        Command::Solve { config } => run_solve(config, &opts),
        Command::Sweep { config } => run_sweep(config, &opts),
        Command::Check { config } => run_check(config, &opts),
        Command::Validate { config } => run_validate(config, &opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitudes {
    pub a_scat: Complex64,
    pub b_scat: Complex64,
}

/// The `solve` output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub schema: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub grid_n: usize,
    pub scheme: Scheme,
    pub kernel_convention: KernelConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Amplitudes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxBalance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<IterationTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_report: Option<SolvabilityReport>,
    /// File name of the CSV field profile, relative to the document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_profile: Option<String>,
}

impl SolutionDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).context("solution document does not parse")?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.schema == SOLUTION_SCHEMA, "unexpected schema {:?}", self.schema);
        anyhow::ensure!(self.residual >= 0.0, "residual must be non-negative");
        anyhow::ensure!(self.grid_n >= 3 && self.grid_n % 2 == 1, "invalid grid_n {}", self.grid_n);
        if let Some(f) = &self.flux {
            anyhow::ensure!(f.reflectance >= 0.0 && f.transmittance >= 0.0, "negative flux");
        }
        Ok(())
    }
}

/// `z,re_u,im_u,abs_u` rows with 17 significant digits and LF endings.
pub fn field_profile_csv(solution: &FieldSolution) -> String {
    let mut out = String::from("z,re_u,im_u,abs_u\n");
    for (z, u) in solution.grid.nodes().iter().zip(&solution.u) {
        writeln!(out, "{z:.16e},{:.16e},{:.16e},{:.16e}", u.re, u.im, u.norm()).expect("string write");
    }
    out
}

fn stem(config: &Path) -> String {
    config
        .file_stem()
        .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}

fn load(config: &Path, opts: &CliOptions) -> std::result::Result<RunConfig, i32> {
    let cfg = match RunConfig::from_path(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return Err(EXIT_CONFIG);
        }
    };
    if let Some(n) = opts.grid_n {
        if n < 3 || n.is_multiple_of(2) {
            eprintln!("--grid-n must be odd and at least 3, got {n}");
            return Err(EXIT_CONFIG);
        }
    }
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: String,
    started_unix: u64,
    elapsed_seconds: f64,
    threads: usize,
}

fn write_meta(opts: &CliOptions, config: &Path, command: &str, started: (SystemTime, Instant)) -> Result<()> {
    let meta = Meta {
        tool: "kerrslab",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: config.display().to_string(),
        started_unix: started.0.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        elapsed_seconds: started.1.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    let name = format!("{}.{command}.meta.json", stem(config));
    write_file(&opts.out_dir, &name, &serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn io_failure(e: anyhow::Error) -> i32 {
    eprintln!("error: {e:#}");
    EXIT_CONFIG
}

fn now() -> (SystemTime, Instant) {
    (SystemTime::now(), Instant::now())
}

fn build(cfg: &RunConfig, params: &ProblemParams, opts: &CliOptions) -> crate::Result<(crate::PermittivityProfile, crate::Grid)> {
    let profile = cfg.profile_for(params.d())?;
    let grid = cfg.grid_for(params.d(), opts.grid_n)?;
    Ok((profile, grid))
}

/// Solves one configuration into its output document; `field_profile` is left unset.
pub fn solve_config(
    cfg: &RunConfig,
    grid_n: Option<usize>,
) -> crate::Result<(SolutionDocument, FieldSolution, FluxBalance)> {
    let params = cfg.params()?;
    let profile = cfg.profile_for(params.d())?;
    let grid = cfg.grid_for(params.d(), grid_n)?;
    let report = if cfg.wants(OutputKind::ContractionReport) {
        Some(check_all(&params, &profile, &grid)?)
    } else {
        None
    };
    let (solution, trace) = solve(&params, &profile, &grid, &cfg.solve_options())?;
    let flux = flux_balance(&solution, &params);
    let doc = SolutionDocument {
        schema: SOLUTION_SCHEMA.into(),
        converged: trace.converged,
        iterations: trace.iters_used,
        residual: solution.residual,
        grid_n: solution.grid.n(),
        scheme: cfg.scheme,
        kernel_convention: cfg.convention(),
        amplitudes: cfg
            .wants(OutputKind::Amplitudes)
            .then_some(Amplitudes { a_scat: solution.a_scat, b_scat: solution.b_scat }),
        flux: cfg.wants(OutputKind::Flux).then_some(flux),
        trace: (cfg.wants(OutputKind::Trace) || !trace.converged).then_some(trace),
        contraction_report: report,
        field_profile: None,
    };
    Ok((doc, solution, flux))
}

pub fn run_solve(config: &Path, opts: &CliOptions) -> i32 {
    let started = now();
    let cfg = match load(config, opts) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (mut doc, solution, flux) = match solve_config(&cfg, opts.grid_n) {
        Ok(r) => r,
        Err(e @ (crate::Error::Domain(_) | crate::Error::LengthMismatch { .. })) => {
            eprintln!("{}: config error: {e}", config.display());
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("{}: solver failed: {e}", config.display());
            return EXIT_NOT_CONVERGED;
        }
    };

    let name = stem(config);
    let profile_name = format!("{name}.profile.csv");
    doc.field_profile = cfg.wants(OutputKind::FieldProfile).then(|| profile_name.clone());
    let written = (|| -> Result<()> {
        if cfg.wants(OutputKind::FieldProfile) {
            write_file(&opts.out_dir, &profile_name, &field_profile_csv(&solution))?;
        }
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        write_file(&opts.out_dir, &format!("{name}.solution.json"), &text)?;
        write_meta(opts, config, "solve", started)
    })();
    if let Err(e) = written {
        return io_failure(e);
    }

    if !doc.converged {
        let deltas = doc.trace.as_ref().map(|t| t.deltas.as_slice()).unwrap_or_default();
        eprintln!("not converged after {} iterations; deltas: {deltas:?}", doc.iterations);
        return EXIT_NOT_CONVERGED;
    }
    if !opts.quiet {
        println!(
            "converged in {} iterations: R = {:.12}, T = {:.12}, residual = {:.3e}",
            doc.iterations, flux.reflectance, flux.transmittance, solution.residual
        );
    }
    EXIT_OK
}

/// One sweep row; failed points carry `converged = false` and NaN results.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub flux: Option<FluxBalance>,
    pub iters: usize,
    pub converged: bool,
    pub t_factor: Option<f64>,
}

pub fn sweep_rows(cfg: &RunConfig, grid_n: Option<usize>) -> crate::Result<Vec<SweepRow>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| crate::Error::Domain("the config has no sweep section".into()))?;
    let opts = cfg.solve_options();
    let rows = sweep
        .values()
        .into_par_iter()
        .map(|value| {
            let mut row = SweepRow { value, flux: None, iters: 0, converged: false, t_factor: None };
            let Ok(params) = cfg.params_with(sweep.parameter, value) else {
                return row;
            };
            let Ok(profile) = cfg.profile_for(params.d()) else {
                return row;
            };
            let Ok(grid) = cfg.grid_for(params.d(), grid_n) else {
                return row;
            };
            let report = if profile.is_real() {
                check_real_case(&params, &profile, &grid, None)
            } else {
                check_complex_case(&params, &profile, &grid, None)
            };
            row.t_factor = report.ok().and_then(|r| r.t_factor);
            if let Ok((solution, trace)) = solve(&params, &profile, &grid, &opts) {
                row.iters = trace.iters_used;
                row.converged = trace.converged;
                row.flux = Some(flux_balance(&solution, &params));
            }
            row
        })
        .collect();
    Ok(rows)
}

pub fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,value,reflectance,transmittance,deficit,iters,converged,t_factor\n");
    let num = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"));
    for r in rows {
        writeln!(
            out,
            "{parameter},{:.16e},{},{},{},{},{},{}",
            r.value,
            num(r.flux.map(|f| f.reflectance)),
            num(r.flux.map(|f| f.transmittance)),
            num(r.flux.map(|f| f.deficit)),
            r.iters,
            r.converged,
            num(r.t_factor)
        )
        .expect("string write");
    }
    out
}

pub fn run_sweep(config: &Path, opts: &CliOptions) -> i32 {
    let started = now();
    let cfg = match load(config, opts) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(sweep) = cfg.sweep.clone() else {
        eprintln!("{}: config error: the config has no sweep section", config.display());
        return EXIT_CONFIG;
    };
    let rows = match sweep_rows(&cfg, opts.grid_n) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: config error: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    let csv = sweep_csv(sweep.parameter.name(), &rows);
    let written = write_file(&opts.out_dir, &format!("{}.sweep.csv", stem(config)), &csv)
        .and_then(|_| write_meta(opts, config, "sweep", started));
    if let Err(e) = written {
        return io_failure(e);
    }
    if !opts.quiet {
        let ok = rows.iter().filter(|r| r.converged).count();
        println!("{ok}/{} sweep points converged", rows.len());
    }
    EXIT_OK
}

pub fn run_check(config: &Path, opts: &CliOptions) -> i32 {
    let started = now();
    let cfg = match load(config, opts) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report = (|| -> crate::Result<_> {
        let params = cfg.params()?;
        let (profile, grid) = build(&cfg, &params, opts)?;
        check_all(&params, &profile, &grid)
    })();
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: config error: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t + "\n",
        Err(e) => return io_failure(e.into()),
    };
    let written = write_file(&opts.out_dir, &format!("{}.check.json", stem(config)), &text)
        .and_then(|_| write_meta(opts, config, "check", started));
    if let Err(e) = written {
        return io_failure(e);
    }
    if !opts.quiet {
        print!("{text}");
    }
    if report.any_satisfied {
        EXIT_OK
    } else {
        EXIT_UNSATISFIED
    }
}

pub fn run_validate(config: &Path, opts: &CliOptions) -> i32 {
    let started = now();
    let cfg = match load(config, opts) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report = (|| -> crate::Result<_> {
        let params = cfg.params()?;
        let profile = cfg.profile_for(params.d())?;
        let n = opts.grid_n.unwrap_or(cfg.grid_n);
        let convention = KernelConvention::new(cfg.validation.oracle_convention)?;
        run_validation(&params, &profile, n, convention, &cfg.solve_options())
    })();
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: config error: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let written = serde_json::to_string_pretty(&report)
        .map_err(anyhow::Error::from)
        .and_then(|t| write_file(&opts.out_dir, &format!("{}.validate.json", stem(config)), &(t + "\n")))
        .and_then(|_| write_meta(opts, config, "validate", started));
    if let Err(e) = written {
        return io_failure(e);
    }
    if !opts.quiet {
        for c in &report.checks {
            let status = if c.skipped { "SKIP" } else if c.passed { "PASS" } else { "FAIL" };
            println!("{status} {}: {}", c.name, c.detail);
        }
    }
    if report.passed {
        EXIT_OK
    } else {
        for c in report.failures() {
            eprintln!("validation failed: {} ({})", c.name, c.detail);
        }
        EXIT_VALIDATION
    }
}
