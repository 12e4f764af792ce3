//! The `lap2` command line: `account`, `optimize`, `curve`, `walls`, `init`
//! and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure or internal error, 2 usage
//! or configuration error, 3 infeasible target. Errors are written to the
//! error stream as `{"error": {"kind": ..., "message": ...}}`.

mod config;
pub mod output;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use config::{FileConfig, Format, RunConfig, SearchEcho, SearchFile};
pub use output::{format_number, to_csv, to_json, Cell, DEFAULT_PRECISION};

use crate::accountant::{invert_noise, privacy_report, wall_diagnostics, PrivacyReport};
use crate::budget::{wall_report, InverseEpsilonWall, Tolerance, WallReport};
use crate::config::{GaussianVariant, Mechanism, SummationMode};
use crate::error::{Error, Result};
use crate::optimizer::{b_star_init, optimize_parameters, rho_star, OptimizerResult, Spacing};
use crate::verify::{run_suite, Suite, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "lap2", version, about = "Privacy accounting for Laplace DP-SGD under l2 clipping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by the accounting commands; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lap2, gaussian, laplace_l1 or pure_laplace.
    #[arg(long, value_parser = parse_enum::<Mechanism>)]
    pub mechanism: Option<Mechanism>,
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long)]
    pub sampling_rate: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub dim: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<u32>,
    /// exact, bucketed or auto.
    #[arg(long, value_parser = parse_enum::<SummationMode>)]
    pub mode: Option<SummationMode>,
    /// normalized or paper_exact.
    #[arg(long, value_parser = parse_enum::<GaussianVariant>)]
    pub gaussian_variant: Option<GaussianVariant>,
    /// json or csv.
    #[arg(long, value_parser = parse_enum::<Format>)]
    pub format: Option<Format>,
    /// Significant digits in printed numbers.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_steps: Option<u32>,
    /// linear or logarithmic.
    #[arg(long, value_parser = parse_enum::<Spacing>)]
    pub c_spacing: Option<Spacing>,
    #[arg(long)]
    pub b_min: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
    /// Bisection stopping width; relative to the upper bracket unless
    /// `--tau-absolute` is given.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, requires = "tau")]
    pub tau_absolute: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    Epsilon,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Fast,
    Full,
}

/// `lo:hi:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(format!("expected lo:hi:steps, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let r = Range {
            lo: num(lo)?,
            hi: num(hi)?,
            steps: steps.trim().parse().map_err(|e| format!("`{steps}`: {e}"))?,
        };
        if r.steps < 1 || !(r.lo <= r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
            return Err(format!("need lo <= hi and steps >= 1, got `{s}`"));
        }
        if r.steps == 1 && r.lo != r.hi {
            return Err(format!("a single step needs lo == hi, got `{s}`"));
        }
        Ok(r)
    }
}

impl Range {
    pub fn points(&self, log: bool) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == self.steps - 1 {
                    return self.hi;
                }
                let t = i as f64 / (self.steps - 1) as f64;
                if log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ε at the configured δ.
    Account {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Grid over the clip with bisection over the noise scale.
    Optimize {
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Accountant curve over one swept variable, as CSV.
    Curve {
        #[arg(long, value_enum)]
        sweep: SweepVar,
        /// `lo:hi:steps`.
        #[arg(long)]
        range: Range,
        /// Logarithmic spacing of the swept values.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Privacy walls: inverted noise, log-log slopes and δ comparison.
    Walls {
        /// Comma-separated sampling rates.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-2, 1e-1])]
        rates: Vec<f64>,
        /// Log-spaced ε grid, `lo:hi:steps`.
        #[arg(long, default_value = "0.1:10:9")]
        epsilons: Range,
        /// Replace both accountants by the exact curve σ = 1/ε.
        #[arg(long)]
        synthetic: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Closed-form starting point for (C, b).
    Init {
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Oracle batteries.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        precision: Option<usize>,
    },
}

/// Resolves defaults, then the config file, then flags, and validates.
pub fn resolve_config(cfg: &ConfigArgs, search: Option<&SearchArgs>) -> Result<RunConfig> {
    let mut run = RunConfig::default();
    if let Some(path) = &cfg.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        run.apply(FileConfig::parse(&text)?);
    }
    let search = search.map(|s| SearchFile {
        c_min: s.c_min,
        c_max: s.c_max,
        c_steps: s.c_steps,
        c_spacing: s.c_spacing,
        b_min: s.b_min,
        b_max: s.b_max,
        tau: s.tau.map(|t| {
            config::TauSpec::Tagged(if s.tau_absolute {
                Tolerance::Absolute(t)
            } else {
                Tolerance::Relative(t)
            })
        }),
    });
    run.apply(FileConfig {
        mechanism: cfg.mechanism,
        clip: cfg.clip,
        noise_scale: cfg.noise_scale,
        sampling_rate: cfg.sampling_rate,
        steps: cfg.steps,
        dim: cfg.dim,
        delta: cfg.delta,
        lambda_max: cfg.lambda_max,
        gaussian_variant: cfg.gaussian_variant,
        mode: cfg.mode,
        search,
        format: cfg.format,
        precision: cfg.precision,
    });
    run.validate()?;
    Ok(run)
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Domain(_) => ("domain", EXIT_USAGE),
        Error::Config(_) => ("config", EXIT_USAGE),
        Error::Infeasible(_) => ("infeasible", EXIT_INFEASIBLE),
        Error::Invariant(_) => ("invariant", EXIT_VERIFY_FAILED),
        Error::Quadrature(_) => ("quadrature", EXIT_VERIFY_FAILED),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string() + "\n"
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    #[serde(flatten)]
    result: T,
    effective_config: &'a RunConfig,
}

#[derive(Serialize)]
struct InitOutput {
    b_star: f64,
    rho_star: f64,
}

#[derive(Serialize)]
struct OptimizeOutput {
    target_epsilon: f64,
    #[serde(flatten)]
    result: OptimizerResult,
}

/// One row of `curve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub sweep_var: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub noise_scale: f64,
    pub clip: f64,
    pub rho: f64,
    pub lambda_star: Option<u32>,
}

pub const CURVE_HEADER: [&str; 7] = ["sweep_var", "epsilon", "delta", "noise_scale", "clip", "rho", "lambda_star"];
pub const WALLS_HEADER: [&str; 9] = [
    "q",
    "epsilon",
    "noise_gaussian",
    "noise_lap2",
    "w_r_gaussian",
    "w_r_lap2",
    "delta_g",
    "delta_l2",
    "left_wall_flag",
];

fn infeasible_or<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The rows `curve` prints for a resolved configuration.
pub fn curve_rows(run: &RunConfig, sweep: SweepVar, values: &[f64]) -> Result<Vec<CurveRow>> {
    let base = run.mechanism_config();
    let search = run.search_spec();
    let from_report = |sweep_var: f64, clip: f64, noise: f64, r: Option<PrivacyReport>| match r {
        Some(r) => CurveRow {
            sweep_var,
            epsilon: r.epsilon,
            delta: r.delta,
            noise_scale: noise,
            clip,
            rho: clip / noise,
            lambda_star: r.lambda_star,
        },
        None => CurveRow {
            sweep_var,
            epsilon: f64::INFINITY,
            delta: run.delta,
            noise_scale: noise,
            clip,
            rho: clip / noise,
            lambda_star: None,
        },
    };
    values
        .iter()
        .map(|&v| match sweep {
            SweepVar::B => {
                let r = infeasible_or(privacy_report(&base.clone().with_noise(v)))?;
                Ok(from_report(v, run.clip, v, r))
            }
            SweepVar::C => {
                let r = infeasible_or(privacy_report(&base.clone().with_clip(v)))?;
                Ok(from_report(v, v, run.noise_scale, r))
            }
            SweepVar::Epsilon => {
                let start = b_star_init(run.clip, v, run.sampling_rate, run.steps, run.delta).ok();
                let sol = infeasible_or(invert_noise(&base, v, (search.b_min, search.b_max), search.tau, start))?;
                Ok(match sol {
                    Some(s) => CurveRow {
                        sweep_var: v,
                        epsilon: s.point.epsilon,
                        delta: run.delta,
                        noise_scale: s.noise_scale,
                        clip: run.clip,
                        rho: run.clip / s.noise_scale,
                        lambda_star: s.point.lambda_star,
                    },
                    None => CurveRow {
                        sweep_var: v,
                        epsilon: f64::INFINITY,
                        delta: run.delta,
                        noise_scale: f64::INFINITY,
                        clip: run.clip,
                        rho: f64::NAN,
                        lambda_star: None,
                    },
                })
            }
        })
        .collect()
}

/// The reports `walls` prints for a resolved configuration.
pub fn walls_reports(run: &RunConfig, rates: &[f64], epsilons: &[f64], synthetic: bool) -> Result<Vec<WallReport>> {
    let search = run.search_spec();
    if synthetic {
        return rates
            .iter()
            .map(|&q| {
                let mut l = InverseEpsilonWall { delta: run.delta };
                let mut g = InverseEpsilonWall { delta: run.delta };
                wall_report(q, epsilons, &mut l, &mut g)
            })
            .collect();
    }
    if let Some(q) = rates.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
        return Err(Error::Config(format!("rates: each must lie in (0, 1], got {q}")));
    }
    wall_diagnostics(&run.mechanism_config(), rates, epsilons, (search.b_min, search.b_max), search.tau)
}

fn walls_csv(reports: &[WallReport], digits: usize) -> String {
    let rows: Vec<Vec<Cell>> = reports
        .iter()
        .flat_map(|rep| {
            rep.rows.iter().map(move |r| {
                vec![
                    Cell::Num(rep.sampling_rate),
                    Cell::Num(r.epsilon),
                    Cell::Num(r.noise_gaussian.unwrap_or(f64::INFINITY)),
                    Cell::Num(r.noise_lap2.unwrap_or(f64::INFINITY)),
                    Cell::opt(r.w_r_gaussian),
                    Cell::opt(r.w_r_lap2),
                    Cell::opt(r.delta_gaussian),
                    Cell::opt(r.delta_lap2),
                    Cell::Flag(r.left_wall),
                ]
            })
        })
        .collect();
    to_csv(&WALLS_HEADER, &rows, digits)
}

fn curve_csv(rows: &[CurveRow], digits: usize) -> String {
    let cells: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.sweep_var),
                Cell::Num(r.epsilon),
                Cell::Num(r.delta),
                Cell::Num(r.noise_scale),
                Cell::Num(r.clip),
                Cell::Num(r.rho),
                r.lambda_star.map_or(Cell::Missing, |l| Cell::Int(l as u64)),
            ]
        })
        .collect();
    to_csv(&CURVE_HEADER, &cells, digits)
}

fn json_only(run: &RunConfig, command: &str) -> Result<()> {
    if run.format == Some(Format::Csv) {
        return Err(Error::Config(format!("format: `{command}` emits json only")));
    }
    Ok(())
}

/// Writes the human summary of a verification run.
fn verify_human(report: &VerifyReport, err: &mut dyn Write, color: bool) -> std::io::Result<()> {
    let paint = |ok: bool| -> String {
        let word = if ok { "PASS" } else { "FAIL" };
        match (color, ok) {
            (false, _) => word.to_string(),
            (true, true) => format!("\x1b[32m{word}\x1b[0m"),
            (true, false) => format!("\x1b[31m{word}\x1b[0m"),
        }
    };
    for c in &report.checks {
        writeln!(
            err,
            "{} {:<30} cases={:<6} max_error={:e} tolerance={:e}",
            paint(c.passed),
            c.name,
            c.cases,
            c.max_error,
            c.tolerance
        )?;
        if let Some(f) = &c.failure {
            writeln!(err, "     first failure: {f}")?;
        }
    }
    let o = &report.ordering;
    writeln!(
        err,
        "B > A in {} of {} cases; max ln B - ln A = {:e}",
        o.b_exceeds_a, o.cases, o.max_log_b_minus_a
    )?;
    writeln!(err, "{} {:?} suite, seed {}", paint(report.passed), report.suite, report.seed)
}

enum Outcome {
    Ok,
    Infeasible,
    VerifyFailed,
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> Result<Outcome> {
    let io = |e: std::io::Error| Error::Invariant(format!("write failed: {e}"));
    match cli.command {
        Command::Account { cfg } => {
            let run = resolve_config(&cfg, None)?;
            json_only(&run, "account")?;
            let report = privacy_report(&run.mechanism_config())?;
            let text = to_json(&WithConfig { result: report, effective_config: &run }, run.precision)?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(Outcome::Ok)
        }
        Command::Optimize { epsilon, cfg, search } => {
            let run = resolve_config(&cfg, Some(&search))?;
            json_only(&run, "optimize")?;
            let result = optimize_parameters(&run.mechanism_config(), epsilon, &run.search_spec())?;
            let body = OptimizeOutput { target_epsilon: epsilon, result };
            let text = to_json(&WithConfig { result: body, effective_config: &run }, run.precision)?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if result.feasible { Outcome::Ok } else { Outcome::Infeasible })
        }
        Command::Curve { sweep, range, log, cfg, search } => {
            let run = resolve_config(&cfg, Some(&search))?;
            if log && !(range.lo > 0.0) {
                return Err(Error::Config("range: logarithmic sweeps need lo > 0".into()));
            }
            let rows = curve_rows(&run, sweep, &range.points(log))?;
            let text = match run.format {
                Some(Format::Json) => {
                    #[derive(Serialize)]
                    struct Rows {
                        rows: Vec<CurveRow>,
                    }
                    to_json(&WithConfig { result: Rows { rows }, effective_config: &run }, run.precision)?
                }
                _ => curve_csv(&rows, run.precision),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(Outcome::Ok)
        }
        Command::Walls { rates, epsilons, synthetic, cfg, search } => {
            let run = resolve_config(&cfg, Some(&search))?;
            if !(epsilons.lo > 0.0) {
                return Err(Error::Config("epsilons: grid must be positive".into()));
            }
            let reports = walls_reports(&run, &rates, &epsilons.points(true), synthetic)?;
            let text = match run.format {
                Some(Format::Json) => {
                    #[derive(Serialize)]
                    struct Reports {
                        synthetic: bool,
                        reports: Vec<WallReport>,
                    }
                    to_json(&WithConfig { result: Reports { synthetic, reports }, effective_config: &run }, run.precision)?
                }
                _ => walls_csv(&reports, run.precision),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(Outcome::Ok)
        }
        Command::Init { epsilon, cfg } => {
            let run = resolve_config(&cfg, None)?;
            json_only(&run, "init")?;
            let body = InitOutput {
                b_star: b_star_init(run.clip, epsilon, run.sampling_rate, run.steps, run.delta)?,
                rho_star: rho_star(epsilon, run.sampling_rate, run.steps, run.delta)?,
            };
            let text = to_json(&WithConfig { result: body, effective_config: &run }, run.precision)?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(Outcome::Ok)
        }
        Command::Verify { suite, seed, precision } => {
            let digits = precision.unwrap_or(DEFAULT_PRECISION);
            if !(1..=17).contains(&digits) {
                return Err(Error::Config(format!("precision: must lie in [1, 17], got {digits}")));
            }
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let report = run_suite(suite, seed)?;
            verify_human(&report, err, color).map_err(io)?;
            out.write_all(to_json(&report, digits)?.as_bytes()).map_err(io)?;
            Ok(if report.passed { Outcome::Ok } else { Outcome::VerifyFailed })
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = err.write_all(error_json("usage", e.render().to_string().trim_end()).as_bytes());
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, out, err, color) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Infeasible) => EXIT_INFEASIBLE,
        Ok(Outcome::VerifyFailed) => EXIT_VERIFY_FAILED,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            let _ = err.write_all(error_json(kind, &e.to_string()).as_bytes());
            code
        }
    }
}

/// Colour only on a terminal and only when `NO_COLOR` is unset or empty.
pub fn color_enabled() -> bool {
    let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    !no_color && std::io::stderr().is_terminal()
}
