mod error;
mod manifest;
mod report;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use error::CliError;
use manifest::{Manifest, Species};
use stages::{ExtrapArgs, ExtrapMethod, SampleArgs, SolveArgs};

#[derive(Parser, Debug)]
#[command(name = "sqdforge", version, about = "Sample-based quantum diagonalization pipeline")]
struct Cli {
    /// Species processed concurrently; 0 uses every core.
    #[arg(long, global = true, env = "SQDFORGE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run manifest (TOML).
    manifest: PathBuf,

    /// Restrict to these species ids (repeatable); default is every species.
    #[arg(long = "species", short = 's')]
    species: Vec<String>,

    /// Overrides the manifest's global seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the LUCJ state and draw noisy bitstrings.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        p_flip: Option<f64>,
        #[arg(long)]
        p_depol: Option<f64>,
    },
    /// Configuration recovery and batched subspace diagonalization per zeta.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Subspace fractions (repeatable); default is the manifest ladder.
        #[arg(long = "zeta")]
        zetas: Vec<f64>,
        #[arg(long)]
        batches: Option<usize>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Zero-variance extrapolation of the solve results.
    Extrapolate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: ExtrapMethod,
        /// LMM cluster count; default is the per-species manifest value.
        #[arg(long)]
        clusters: Option<usize>,
        /// GEV overlap threshold.
        #[arg(long, default_value_t = sqdforge::extrapolate::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Energy and reaction-energy error tables against a reference method.
    Report {
        manifest: PathBuf,
        #[arg(long, default_value = "ccsd_t")]
        reference: String,
    },
    /// Sample quality, subspace sizes and circuit resources per species.
    Diagnostics {
        #[command(flatten)]
        common: Common,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

/// Runs `f` for each species in parallel and prints results in manifest order.
fn per_species<T, F>(m: &Manifest, ids: &[String], f: F) -> Result<(), CliError>
where
    T: Serialize + Send,
    F: Fn(&Species) -> Result<T, CliError> + Sync,
{
    let selected = m.select(ids)?;
    let results: Vec<Result<T, CliError>> =
        selected.par_iter().map(|s| f(s).map_err(|e| e.context(format!("species `{}`", s.id)))).collect();
    let mut failed: Option<CliError> = None;
    for r in results {
        match (r, failed.as_mut()) {
            (Ok(v), _) => print_json(&v)?,
            (Err(e), Some(f)) => f.message = format!("{}\n{e}", f.message),
            (Err(e), None) => failed = Some(e),
        }
    }
    failed.map_or(Ok(()), Err)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample { common, shots, p_flip, p_depol } => {
            let m = Manifest::load(&common.manifest)?;
            let args = SampleArgs { shots, p_flip, p_depol, seed: common.seed };
            per_species(&m, &common.species, |s| stages::sample(&m, s, args))
        }
        Command::Solve { common, zetas, batches, max_iter } => {
            let m = Manifest::load(&common.manifest)?;
            let args = SolveArgs { zetas, batches, max_iter, seed: common.seed };
            per_species(&m, &common.species, |s| {
                let records = stages::solve(&m, s, &args)?;
                Ok(records
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "species": r.species, "zeta": r.zeta, "d": r.d,
                            "energy": r.result.energy, "converged": r.result.converged,
                        })
                    })
                    .collect::<Vec<_>>())
            })
        }
        Command::Extrapolate { common, method, clusters, epsilon } => {
            let m = Manifest::load(&common.manifest)?;
            let args = ExtrapArgs { method, clusters, epsilon, seed: common.seed };
            per_species(&m, &common.species, |s| {
                let r = stages::extrapolate(&m, s, args)?;
                Ok(serde_json::json!({
                    "species": r.species, "method": r.result.method,
                    "estimate": r.result.estimate, "ci": r.result.ci,
                }))
            })
        }
        Command::Report { manifest, reference } => {
            let m = Manifest::load(&manifest)?;
            print_json(&report::report(&m, &reference)?)
        }
        Command::Diagnostics { common } => {
            let m = Manifest::load(&common.manifest)?;
            per_species(&m, &common.species, |s| stages::diagnostics(&m, s))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs.filter(|&j| j > 0) {
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
