//! Command-line front end over scenario files.
//!
//! Exit codes: 0 success, 1 hypothesis or precondition failure, 2 unreadable
//! input (scenario parse errors, empty sweep lists).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_assumptions, Status};
use crate::operators::principal_eigenpair;
use crate::scenario::{InitialData, InitialSpec, Scenario};
use crate::solver::{bound_report, simulate, BlowupVerdict, RunStatus, Verification};

pub const OUT_ENV: &str = "BLOWUPLAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "blowuplab", version, about = "Blow-up experiments for p-Laplacian heat equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the targeted theorem's hypotheses on f and zeta.
    Check(Common),
    /// Evaluate the blow-up time bound of the targeted theorem.
    Bounds(Common),
    /// Principal Dirichlet eigenpair of the scenario grid.
    Eigen(Common),
    /// Integrate and write the trajectory and verdict.
    Simulate(Common),
    /// Integrate and exit 0 only when the run is consistent with the bound.
    Verify(Common),
    /// Rerun the scenario over a list of values of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; the BLOWUPLAB_OUT environment variable takes precedence.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run even if hypotheses fail, marking bounds non-applicable.
    #[arg(long)]
    pub exploratory: bool,
    /// Halve the grid spacing this many times.
    #[arg(long, default_value_t = 0)]
    pub refine: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    /// Eigenfunction amplitude, or the multiple of the minimal cutoff amplitude.
    Amplitude,
    /// Nodes per axis.
    N,
    EpsReg,
    DtMax,
    Horizon,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'static str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    error: ErrorBody<'a>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Scenario(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn out_dir(common: &Common, scenario: &Scenario) -> Result<PathBuf> {
    let dir = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| common.out.clone())
        .or_else(|| scenario.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Check(c) => cmd_check(c),
        Command::Bounds(c) => cmd_bounds(c),
        Command::Eigen(c) => cmd_eigen(c),
        Command::Simulate(c) => cmd_simulate(c, false),
        Command::Verify(c) => cmd_simulate(c, true),
        Command::Sweep(s) => cmd_sweep(s),
    };
    result.unwrap_or_else(|e| report_error(&e))
}

fn cmd_check(c: &Common) -> Result<i32> {
    let scenario = Scenario::load(&c.scenario)?;
    let regime = scenario.regime().ok_or_else(|| Error::Precondition("scenario targets no theorem regime".into()))?;
    let profile = scenario.profile()?;
    let report = check_assumptions(&profile.f, &profile.zeta, regime, &scenario.sampling())?;
    print_json(&report)?;
    for check in &report.checks {
        match &check.status {
            Status::Fails { witness, detail } => {
                eprintln!("({}) fails at s = {witness:e}: {detail}", check.assumption.key())
            }
            Status::Undetermined { detail } => eprintln!("({}) undetermined: {detail}", check.assumption.key()),
            Status::Holds => {}
        }
    }
    Ok(if report.all_hold() { 0 } else { 1 })
}

fn cmd_bounds(c: &Common) -> Result<i32> {
    let scenario = Scenario::load(&c.scenario)?;
    let problem = scenario.problem(c.refine, false)?;
    match bound_report(&problem) {
        Ok(report) => {
            write_json(&out_dir(c, &scenario)?.join("bounds.json"), &report)?;
            print_json(&report)?;
            Ok(0)
        }
        Err(e) => {
            let message = e.to_string();
            print_json(&ErrorObject { error: ErrorBody { kind: e.kind(), message: &message } })?;
            Ok(exit_code(&e))
        }
    }
}

fn cmd_eigen(c: &Common) -> Result<i32> {
    let scenario = Scenario::load(&c.scenario)?;
    let grid = scenario.grid(c.refine)?;
    let eigen = principal_eigenpair(&grid, 1e-10)?;
    let dir = out_dir(c, &scenario)?;
    let file = File::create(dir.join("eigenfunction.csv"))?;
    eigen.phi1.write_csv(&grid, BufWriter::new(file))?;
    let header = eigen.header(&grid);
    write_json(&dir.join("eigen.json"), &header)?;
    print_json(&header)?;
    Ok(0)
}

fn verify_exit(v: &BlowupVerdict) -> i32 {
    match v.verification {
        Verification::Pass | Verification::NotApplicable => 0,
        Verification::Fail | Verification::Inconclusive => 1,
    }
}

fn cmd_simulate(c: &Common, verify: bool) -> Result<i32> {
    let scenario = Scenario::load(&c.scenario)?;
    let problem = scenario.problem(c.refine, c.exploratory)?;
    let dir = out_dir(c, &scenario)?;
    let csv = BufWriter::new(File::create(dir.join(&scenario.outputs.trajectory))?);
    let (_, verdict) = simulate(&problem, Some(csv))?;
    write_json(&dir.join(&scenario.outputs.verdict), &verdict)?;
    print_json(&verdict)?;
    Ok(if verify { verify_exit(&verdict) } else { 0 })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    value: f64,
    status: Option<RunStatus>,
    #[serde(rename = "T_obs")]
    t_obs: Option<f64>,
    uncertainty: Option<f64>,
    #[serde(rename = "T_star")]
    t_star: Option<f64>,
    margin: Option<f64>,
    error: Option<String>,
}

fn with_value(base: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario> {
    let mut s = base.clone();
    match axis {
        SweepAxis::Amplitude => {
            let data = match s.initial.resolve()? {
                InitialData::EigenScaled(_) => InitialData::EigenScaled(value),
                InitialData::PropositionCutoff(mut spec) => {
                    spec.factor = value;
                    InitialData::PropositionCutoff(spec)
                }
                InitialData::Table(_) => {
                    return Err(Error::Scenario("amplitude sweep needs constructed initial data".into()))
                }
            };
            s.initial = InitialSpec::Structured(data);
        }
        SweepAxis::N => {
            if !(value >= 2.0 && value.fract() == 0.0) {
                return Err(Error::InvalidParameter(format!("node count must be an integer >= 2, got {value}")));
            }
            s.grid.n = value as usize;
            if s.grid.ny.is_some() || s.grid.y.is_some() {
                s.grid.ny = Some(value as usize);
            }
        }
        SweepAxis::EpsReg => s.solver.step.eps_reg = value,
        SweepAxis::DtMax => s.solver.step.dt_max = value,
        SweepAxis::Horizon => s.solver.horizon = value,
    }
    Ok(s)
}

fn sweep_row(base: &Scenario, args: &SweepArgs, value: f64) -> SweepRow {
    let outcome = with_value(base, args.axis, value)
        .and_then(|s| s.problem(args.common.refine, true))
        .and_then(|p| simulate::<std::io::Sink>(&p, None));
    match outcome {
        Ok((_, v)) => SweepRow {
            value,
            status: Some(v.status),
            t_obs: v.t_obs,
            uncertainty: v.uncertainty,
            t_star: v.bound_t_star(),
            margin: v.bound.margin,
            error: None,
        },
        Err(e) => SweepRow {
            value,
            status: None,
            t_obs: None,
            uncertainty: None,
            t_star: None,
            margin: None,
            error: Some(e.to_string()),
        },
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    if args.values.is_empty() {
        eprintln!("error: sweep needs at least one value");
        return Ok(2);
    }
    let base = Scenario::load(&args.common.scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| args.values.par_iter().map(|&v| sweep_row(&base, args, v)).collect());

    let dir = out_dir(&args.common, &base)?;
    let path = dir.join("sweep.csv");
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["value", "status", "T_obs", "uncertainty", "T_star", "margin", "error"])?;
        let num = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:e}"));
        for r in &rows {
            let status = r.status.map_or_else(String::new, |s| {
                serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
            });
            w.write_record([
                format!("{:e}", r.value),
                status,
                num(r.t_obs),
                num(r.uncertainty),
                num(r.t_star),
                num(r.margin),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    fs::write(&path, &buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    std::io::stdout().write_all(&buf)?;
    Ok(0)
}
