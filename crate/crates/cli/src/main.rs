use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser};
use serde_json::json;
use sha2::{Digest, Sha256};

mod config;
mod error;
mod jobs;
mod output;

use config::JobConfig;
use error::CliError;
use jobs::{Context, Subcommand};
use output::write_atomic;

/// Floquet spectra, PT-breaking thresholds and topological invariants of
/// driven non-Hermitian dimerized chains.
#[derive(Parser)]
#[command(name = "floquet-pt", version)]
enum Cli {
    /// Quasienergies and mode diagnostics at one parameter point.
    Spectrum(JobArgs),
    /// PT-breaking threshold at one parameter point.
    Threshold(JobArgs),
    /// 2-D map of gamma_c, gamma_total, winding or sigma_z_max.
    ThresholdMap(JobArgs),
    /// Floquet and static winding numbers along one axis.
    WindingScan(JobArgs),
    /// <sigma_z> of the upper Floquet band across the Brillouin zone.
    ChiralScan(JobArgs),
    /// Sigma_P of the left edge mode over one period.
    EdgeTrace(JobArgs),
    /// Exact quasienergies against the effective static chain.
    EffectiveCompare(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the CPU count.
    #[arg(long, env = "FLOQUET_PT_THREADS")]
    jobs: Option<usize>,
    /// Use the full-resolution `sweep_full` grid when the config has one.
    #[arg(long)]
    full: bool,
}

fn run(sub: Subcommand, args: &JobArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let job = JobConfig::parse(&text, args.full)?;
    if args.jobs == Some(0) {
        return Err(CliError::Schema("--jobs must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Numerical(e.to_string()))?;

    let fingerprint = job.fingerprint_value(sub.name());
    let hash = hex::encode(Sha256::digest(serde_json::to_vec(&fingerprint).expect("fingerprint serializes")));
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let ctx = Context {
        out: &args.out,
        hash: &hash,
        pool: &pool,
    };

    let (output, hard_error) = match jobs::run(sub, &job, &ctx) {
        Ok(o) => (o, None),
        Err(e @ CliError::Numerical(_)) => (jobs::JobOutput::default(), Some(e)),
        Err(e) => return Err(e),
    };
    let partial = hard_error.is_some() || !output.failures.is_empty();
    if hard_error.is_none() {
        write_atomic(&args.out.join("result.csv"), output.csv.as_bytes())?;
        if let Some(svg) = &output.svg {
            write_atomic(&args.out.join("result.svg"), svg.as_bytes())?;
        }
    }
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": sub.name(),
        "status": if partial { "partial" } else { "complete" },
        "error": hard_error.as_ref().map(ToString::to_string),
        "config_hash": hash,
        "config": fingerprint,
        "resolution": job.resolution,
        "workers": pool.current_num_threads(),
        "points_computed": output.computed,
        "points_cached": output.cached,
        "failures": output.failures,
        "summary": output.summary,
        "elapsed_seconds": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&args.out.join("manifest.json"), text.as_bytes())?;

    if let Some(e) = hard_error {
        return Err(e);
    }
    if !output.failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} grid point(s) failed; see manifest.json",
            output.failures.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let (sub, args) = match Cli::parse() {
        Cli::Spectrum(a) => (Subcommand::Spectrum, a),
        Cli::Threshold(a) => (Subcommand::Threshold, a),
        Cli::ThresholdMap(a) => (Subcommand::ThresholdMap, a),
        Cli::WindingScan(a) => (Subcommand::WindingScan, a),
        Cli::ChiralScan(a) => (Subcommand::ChiralScan, a),
        Cli::EdgeTrace(a) => (Subcommand::EdgeTrace, a),
        Cli::EffectiveCompare(a) => (Subcommand::EffectiveCompare, a),
    };
    match run(sub, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("floquet-pt {}: {e}", sub.name());
            ExitCode::from(e.exit_code())
        }
    }
}
