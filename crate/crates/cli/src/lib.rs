//! `hxray`: configuration-driven experiments for the sub-Riemannian X-ray transform.
//!
//! Exit codes: 0 every assertion passed, 1 a tolerance failed or the computation
//! errored (the report is still written), 2 the configuration or command line is bad.

pub mod config;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};
use experiments::{numeric_reason, Failure, Outcome};
use report::{emit_report, Artifact, Report, Status};

/// Known-good ℍ¹ configuration used by `selftest` when no `--config` is given.
pub const BUNDLED_SELFTEST: &str = include_str!("selftest.toml");

#[derive(Debug, Parser)]
#[command(name = "hxray", version, about = "X-ray transform experiments on H-type groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quick consistency battery (bundled ℍ¹ config by default).
    Selftest(Flags),
    /// Sample a geodesic and write it as CSV.
    Geodesic(Flags),
    /// Evaluate the X-ray transform at configured points.
    Xray(Flags),
    /// Eigenvalues and invertibility of the normal operator.
    Spectrum(Flags),
    /// Check the slice identity on sampled geodesic directions.
    VerifySlice(Flags),
    /// Recover Fourier data from X-ray data.
    Reconstruct(Flags),
    /// Which central frequencies a charge set reaches.
    SupportMap(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides run.threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write operators as .fock and .csv files.
    #[arg(long)]
    emit_matrices: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Selftest(f) => ("selftest", f),
            Command::Geodesic(f) => ("geodesic", f),
            Command::Xray(f) => ("xray", f),
            Command::Spectrum(f) => ("spectrum", f),
            Command::VerifySlice(f) => ("verify-slice", f),
            Command::Reconstruct(f) => ("reconstruct", f),
            Command::SupportMap(f) => ("support-map", f),
        }
    }
}

/// The config block a subcommand needs, if any.
fn required_block(name: &str) -> Option<&'static str> {
    match name {
        "geodesic" => Some("geodesic"),
        "xray" => Some("xray"),
        "spectrum" => Some("spectrum"),
        "verify-slice" => Some("slice"),
        "reconstruct" => Some("reconstruct"),
        "support-map" => Some("support"),
        _ => None,
    }
}

fn has_block(cfg: &RunConfig, block: &str) -> bool {
    match block {
        "geodesic" => cfg.geodesic.is_some(),
        "xray" => cfg.xray.is_some(),
        "spectrum" => cfg.spectrum.is_some(),
        "slice" => cfg.slice.is_some(),
        "reconstruct" => cfg.reconstruct.is_some(),
        "support" => cfg.support.is_some(),
        _ => true,
    }
}

fn load(name: &str, flags: &Flags) -> Result<RunConfig, (String, ConfigError)> {
    let text = match &flags.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ("config.read".to_string(), ConfigError { field: p.display().to_string(), msg: e.to_string() }))?,
        None if name == "selftest" => BUNDLED_SELFTEST.to_string(),
        None => return Err(("usage.missing_config".into(), ConfigError { field: "--config".into(), msg: format!("`{name}` needs a configuration file") })),
    };
    let mut cfg = RunConfig::parse(&text).map_err(|e| ("config.parse".to_string(), e))?;
    if let Some(seed) = flags.seed {
        cfg.run.seed = seed;
    }
    if let Some(t) = flags.threads {
        cfg.run.threads = t;
    }
    if let Some(out) = &flags.out {
        cfg.output.dir = out.display().to_string();
    }
    if flags.emit_matrices {
        cfg.output.emit_matrices = true;
    }
    Ok(cfg)
}

fn dispatch(name: &str, s: &htype_xray::algebra::HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match name {
        "selftest" => experiments::selftest(s, cfg),
        "geodesic" => experiments::geodesic(s, cfg),
        "xray" => experiments::xray_cmd(s, cfg),
        "spectrum" => experiments::spectrum(s, cfg),
        "verify-slice" => experiments::verify_slice(s, cfg),
        "reconstruct" => experiments::reconstruct(s, cfg),
        "support-map" => experiments::support_map(s, cfg),
        _ => unreachable!("clap restricts subcommands"),
    }
}

fn finish(report: &mut Report, dir: PathBuf, files: &[(String, String)], code: i32) -> i32 {
    report.artifacts = files.iter().map(|(n, _)| Artifact { name: n.clone(), kind: n.rsplit('.').next().unwrap_or("").into() }).collect();
    match emit_report(&dir, report, files) {
        Ok(path) => {
            let status = match report.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Error => "error",
            };
            let reason = report.reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default();
            println!("{}: {status}{reason}, {} assertions -> {}", report.subcommand, report.assertions.len(), path.display());
            code
        }
        Err(e) => {
            eprintln!("error[io]: cannot write report to {}: {e}", dir.display());
            1
        }
    }
}

/// Parses `args` (program name first), runs one subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
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
    let (name, flags) = cli.cmd.parts();
    let mut report = Report::empty(name);
    let fallback_dir = flags.out.clone().unwrap_or_else(|| PathBuf::from("hxray-out"));

    let cfg = match load(name, flags) {
        Ok(c) => c,
        Err((reason, e)) => {
            eprintln!("error[{reason}]: {e}");
            report.error(&reason, e.to_string());
            return finish(&mut report, fallback_dir, &[], 2);
        }
    };
    report.config = serde_json::to_value(&cfg).unwrap_or(serde_json::Value::Null);
    let dir = PathBuf::from(&cfg.output.dir);
    let s = match cfg.validate() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error[config.invalid]: {e}");
            report.error("config.invalid", e.to_string());
            return finish(&mut report, dir, &[], 2);
        }
    };
    if let Some(block) = required_block(name) {
        if !has_block(&cfg, block) {
            let msg = format!("[{block}]: `{name}` needs this block");
            eprintln!("error[config.missing_block]: {msg}");
            report.error("config.missing_block", msg);
            return finish(&mut report, dir, &[], 2);
        }
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.run.threads).build() {
        Ok(p) => p,
        Err(e) => {
            report.error("runtime.threads", e.to_string());
            return finish(&mut report, dir, &[], 1);
        }
    };
    match pool.install(|| dispatch(name, &s, &cfg)) {
        Ok(out) => {
            report.results = out.results;
            report.assertions = out.assertions;
            report.settle();
            let code = if report.status == Status::Pass { 0 } else { 1 };
            finish(&mut report, dir, &out.files, code)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error[config.invalid]: {e}");
            report.error("config.invalid", e.to_string());
            finish(&mut report, dir, &[], 2)
        }
        Err(Failure::Numeric(e)) => {
            let reason = numeric_reason(&e);
            eprintln!("error[{reason}]: {e}");
            report.error(reason, e.to_string());
            finish(&mut report, dir, &[], 1)
        }
    }
}
