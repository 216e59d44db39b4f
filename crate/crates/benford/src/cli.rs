//! Command-line interface.
//!
//! Exit status: 0 when the run completes and passes, 2 when a conformance
//! test fails, 1 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use benford_core::conformance::conformance_report;
use benford_core::twostep::{
    benford_fraction, boundary_on_ray, classify_basin, cycle2_limit, orbit_log_reals, shadow_h_case_i, shadow_h_case_iii, BasinLabel, Case, Region, TwoStepParams,
    DEFAULT_MAX_ITER,
};
use benford_core::Thresholds;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::report::{render, to_json, write_file, write_orbit_csv, Format};
use crate::reproduce::{boundary_csv, fig1, fig1a, fig2_boundary, rows_csv, Figure};
use crate::run::run;

#[derive(Debug, Parser)]
#[command(name = "benford", version, about = "Benford conformance of dynamical systems")]
pub struct Cli {
    /// Overrides the seed of the config or subcommand.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs an experiment config; writes the report and the orbit CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerates a reference table or curve.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Two-step recursions x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2.
    Twostep {
        #[command(subcommand)]
        command: TwoStepCommand,
    },
}

/// Parameters, given as exact decimals or fractions such as `1.2` or `6/5`.
#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value = "1")]
    pub a1: String,
    #[arg(long, default_value = "1")]
    pub a2: String,
    #[arg(long, default_value = "2")]
    pub b1: String,
    #[arg(long, default_value = "2")]
    pub b2: String,
    /// Allow exponents in (0, 1] (orbits and basins only).
    #[arg(long)]
    pub extended: bool,
}

impl ParamArgs {
    fn params(&self) -> anyhow::Result<TwoStepParams> {
        if self.extended {
            let f = |s: &str| benford_core::twostep::Rational::parse(s).map(|r| r.to_f64());
            Ok(TwoStepParams::extended(f(&self.a1)?, f(&self.a2)?, f(&self.b1)?, f(&self.b2)?)?)
        } else {
            Ok(TwoStepParams::parse(&self.a1, &self.a2, &self.b1, &self.b2)?)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Auto,
    I,
    Iii,
}

#[derive(Debug, Subcommand)]
pub enum TwoStepCommand {
    /// Orbit and its conformance report.
    Orbit {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        x2: f64,
        #[arg(short = 'N', long = "n", default_value_t = 10_000)]
        n: usize,
    },
    /// Basin boundary along a ray, and the 2-cycle reached from it.
    Basin {
        #[command(flatten)]
        params: ParamArgs,
        /// Direction `u,v` with both components positive.
        #[arg(long, value_parser = parse_pair)]
        ray: (f64, f64),
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Shadowing constant h of an orbit escaping to infinity.
    Shadow {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        x2: f64,
        #[arg(long = "case", value_enum, default_value_t = CaseArg::Auto)]
        case: CaseArg,
    },
    /// Fraction of seeds in a rectangle whose orbits pass.
    Fraction {
        #[command(flatten)]
        params: ParamArgs,
        /// `lo1,hi1,lo2,hi2`.
        #[arg(long, value_parser = parse_region)]
        region: Region,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(short = 'N', long = "n", default_value_t = 10_000)]
        n: usize,
    },
}

fn parse_floats(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_region(s: &str) -> Result<Region, String> {
    let v = parse_floats(s, 4)?;
    Ok(Region { lo1: v[0], hi1: v[1], lo2: v[2], hi2: v[3] })
}

/// Runs the parsed command; returns the exit status.
pub fn execute(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = run(&cfg)?;
            let text = render(&out.report, cli.format);
            let report_name = cfg.outputs.report.clone().unwrap_or_else(|| format!("report.{}", cli.format.extension()));
            write_file(&cli.out.join(report_name), text.as_bytes())?;
            if let Some(name) = &cfg.outputs.orbit_csv {
                if !out.sequence.is_empty() {
                    let mut buf = Vec::new();
                    write_orbit_csv(&mut buf, &out.sequence)?;
                    write_file(&cli.out.join(name), &buf)?;
                }
            }
            print!("{text}");
            Ok(status(out.report.passed))
        }
        Command::Reproduce { figure } => {
            let text = match (figure, cli.format) {
                (Figure::Fig1, Format::Csv) => rows_csv(&fig1(10_000)?),
                (Figure::Fig1, Format::Json) => to_json(&fig1(10_000)?),
                (Figure::Fig1a, Format::Csv) => rows_csv(&fig1a(&[100, 1_000, 10_000])?),
                (Figure::Fig1a, Format::Json) => to_json(&fig1a(&[100, 1_000, 10_000])?),
                (Figure::Fig2Boundary, _) => boundary_csv(&fig2_boundary(360)?),
            };
            let name = match (figure, cli.format) {
                (Figure::Fig2Boundary, _) | (_, Format::Csv) => figure.file_name().to_string(),
                (_, Format::Json) => figure.file_name().replace(".csv", ".json"),
            };
            write_file(&cli.out.join(name), text.as_bytes())?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Twostep { command } => twostep(command, cli.seed.unwrap_or(0), &cli.out, cli.format),
    }
}

fn status(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

#[derive(Serialize)]
struct OrbitSummary {
    basin: BasinLabel,
    case: Option<Case>,
    /// Absent when the orbit is too short for the statistics.
    report: Option<benford_core::ConformanceReport>,
}

#[derive(Serialize)]
struct BoundarySummary {
    r: f64,
    x1: f64,
    x2: f64,
    /// Odd and even limits of the orbit from the boundary point.
    cycle: Option<(f64, f64)>,
    cycle_error: Option<String>,
}

fn twostep(cmd: &TwoStepCommand, seed: u64, out: &Path, format: Format) -> anyhow::Result<ExitCode> {
    match cmd {
        TwoStepCommand::Orbit { params, x1, x2, n } => {
            let p = params.params()?;
            let basin = classify_basin(&p, *x1, *x2, DEFAULT_MAX_ITER)?;
            let orbit = orbit_log_reals(&p, *x1, *x2, *n)?;
            let mut buf = Vec::new();
            write_orbit_csv(&mut buf, &orbit)?;
            write_file(&out.join("orbit.csv"), &buf)?;
            let report = conformance_report(&orbit, &Thresholds::default()).ok();
            let passed = report.as_ref().map_or(true, |r| r.passed());
            if format == Format::Csv {
                print!("{}", String::from_utf8(buf)?);
            } else {
                print!("{}", to_json(&OrbitSummary { basin, case: p.case(), report }));
            }
            Ok(status(passed))
        }
        TwoStepCommand::Basin { params, ray, tol } => {
            let p = params.params()?;
            let norm = ray.0.hypot(ray.1);
            if !(ray.0 > 0.0 && ray.1 > 0.0 && norm.is_finite()) {
                bail!("--ray: both components must be positive");
            }
            let dir = (ray.0 / norm, ray.1 / norm);
            let r = boundary_on_ray(&p, dir, *tol)?;
            let (x1, x2) = (r * dir.0, r * dir.1);
            let (cycle, cycle_error) = match cycle2_limit(&p, x1, x2) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let s = BoundarySummary { r, x1, x2, cycle, cycle_error };
            print!("{}", to_json(&s));
            Ok(ExitCode::SUCCESS)
        }
        TwoStepCommand::Shadow { params, x1, x2, case } => {
            let p = params.params()?;
            let case = match case {
                CaseArg::I => Case::I,
                CaseArg::Iii => Case::III,
                CaseArg::Auto => p.case().context("shadowing needs exponents above 1")?,
            };
            let (y1, y2) = (x1.log10(), x2.log10());
            let h = match case {
                Case::I => shadow_h_case_i(&p, y1, y2)?,
                Case::III => shadow_h_case_iii(&p, y1, y2)?,
                Case::II => bail!("case II has no shadowing constant; its ratio orbit converges instead"),
            };
            print!("{}", to_json(&h));
            Ok(ExitCode::SUCCESS)
        }
        TwoStepCommand::Fraction { params, region, samples, n } => {
            let p = params.params()?;
            let report = benford_fraction(&p, region, *samples, *n, seed, &Thresholds::default())?;
            print!("{}", to_json(&report));
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parses the process arguments and runs.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
