//! Command-line front end: scenario files, `sweep`, `optimize` and
//! `validate`.
//!
//! Exit codes: 0 success, 1 anchor failure, 2 configuration or I/O error.

pub mod config;
pub mod optimize;
pub mod sweep;
pub mod validate;

#[cfg(test)]
mod tests;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{ConfigError, OutputFormat, Scenario, ScenarioConfig, SweepVar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANCHOR_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "risplace",
    version,
    about = "RIS-assisted mmWave link budget and RIS placement"
)]
pub struct Cli {
    /// Log filter, e.g. `warn` or `debug`.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the link over the sweep block of a scenario.
    Sweep(SweepArgs),
    /// Report the optimal RIS placement for a scenario.
    Optimize(OptimizeArgs),
    /// Check the built-in reference anchors.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; defaults to `output.path` or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Append per-RU spread columns.
    #[arg(long)]
    pub diagnostics: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Also write an SVG plot of the SNR curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Also run the numeric oracle.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub json: bool,
    /// First-null factor used by FNBW-dependent anchors.
    #[arg(long, hide = true, default_value_t = crate::antenna::FNBW_FACTOR)]
    pub fnbw_factor: f64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .try_init();
    match cli.command {
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Optimize(a) => cmd_optimize(&a, out, err),
        Command::Validate(a) => cmd_validate(&a, out, err),
    }
}

fn fail(err: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_CONFIG
}

fn load(path: &Path) -> Result<Scenario, ConfigError> {
    ScenarioConfig::load(path)?.resolve()
}

fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| format!("cannot start worker pool: {e}"))?;
    Ok(pool.install(f))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sc = match load(&a.config) {
        Ok(s) => s,
        Err(e) => return fail(err, e),
    };
    let Some(sw) = sc.sweep.clone() else {
        return fail(
            err,
            ConfigError {
                field: "sweep".into(),
                message: "a [sweep] section is required".into(),
            },
        );
    };
    let records = match with_threads(a.threads, || sweep::run_sweep(&sc, &sw, a.diagnostics)) {
        Ok(r) => r,
        Err(e) => return fail(err, e),
    };
    let format = a.format.unwrap_or(sc.output.format);
    let text = match format {
        OutputFormat::Csv => sweep::to_csv(&records, a.diagnostics),
        OutputFormat::Json => sweep::to_json(&records),
    };
    let path = a
        .out
        .clone()
        .or_else(|| sc.output.path.clone().map(PathBuf::from));
    if let Err(e) = emit(path.as_deref(), &text, out) {
        return fail(err, format!("cannot write output: {e}"));
    }
    if let Some(p) = &a.plot {
        if let Err(e) = std::fs::write(p, sweep::to_svg(&records)) {
            return fail(err, format!("cannot write plot: {e}"));
        }
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(
            err,
            "warning: {} = {}: {}",
            r.sweep_var,
            r.value,
            r.error.as_deref().unwrap_or("")
        );
    }
    EXIT_OK
}

fn cmd_optimize(a: &OptimizeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sc = match load(&a.config) {
        Ok(s) => s,
        Err(e) => return fail(err, e),
    };
    let reports = match with_threads(a.threads, || optimize::optimize(&sc, a.oracle)) {
        Ok(r) => r,
        Err(e) => return fail(err, e),
    };
    let points: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| match r {
            Ok(rep) => serde_json::to_value(rep).expect("report serializes"),
            Err(e) => json!({ "error": e }),
        })
        .collect();
    let max_gap = reports
        .iter()
        .filter_map(|r| r.as_ref().ok()?.gap_fraction)
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.max(g)))
        });
    let doc = json!({
        "r_h": sc.geometry.r_h,
        "domain": [sc.domain.0, sc.domain.1],
        "mode": sc.mode,
        "max_gap_fraction": max_gap,
        "points": points,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    text.push('\n');
    if let Err(e) = emit(a.out.as_deref(), &text, out) {
        return fail(err, format!("cannot write output: {e}"));
    }
    EXIT_OK
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let anchors = match validate::anchors(a.fnbw_factor) {
        Ok(v) => v,
        Err(e) => return fail(err, e),
    };
    let failed = anchors.iter().filter(|x| !x.passed).count();
    if a.json {
        let doc = json!({ "anchors": anchors, "failed": failed });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        for x in &anchors {
            let _ = writeln!(out, "{}", x.line());
        }
        let _ = writeln!(
            out,
            "{} of {} anchors passed",
            anchors.len() - failed,
            anchors.len()
        );
    }
    if failed > 0 {
        EXIT_ANCHOR_FAILURE
    } else {
        EXIT_OK
    }
}
