mod commands;
mod dist;
mod error;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::FitOptions;
use crate::dist::AnyDistribution;
use crate::error::{CliError, CliResult};
use crate::output::{emit, write_atomic, Table};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Directional statistics and filtering on circles, tori, spheres and SE(2).
///
/// Distributions are passed as a JSON file path, `-` for stdin, or inline
/// JSON text.
#[derive(Debug, Parser)]
#[command(name = "dirkit", version)]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Convergence tolerance for iterative fits.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Output file (or directory for filter-run); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the density on a regular grid or at given points.
    Pdf {
        dist: String,
        /// Points per periodic axis.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// CSV file of evaluation points with a header row.
        #[arg(long)]
        at: Option<PathBuf>,
    },
    /// Trigonometric moments; repeat --k for several orders, comma-separate
    /// multi-indices on the torus.
    Moment {
        dist: String,
        #[arg(long = "k", required = true)]
        k: Vec<String>,
        /// Use quadrature instead of the closed form.
        #[arg(long)]
        numerical: bool,
    },
    /// Fit a family to a CSV sample file.
    Fit {
        family: String,
        samples: PathBuf,
        /// Mixture components for complex_watson_mixture.
        #[arg(long, default_value_t = 2)]
        components: usize,
    },
    /// Draw random samples.
    Sample {
        dist: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Deterministic or Fourier approximation: dirac3, dirac5, dirac,
    /// fourier[:n], fourier_sqrt[:n].
    Approx {
        dist: String,
        #[arg(long)]
        scheme: String,
    },
    /// Run a filter scenario config.
    FilterRun { config: String },
    /// Run the built-in regression checks.
    Selftest,
}

fn threads() -> CliResult<Option<usize>> {
    match std::env::var("DIRKIT_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("DIRKIT_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

fn emit_table(cli: &Cli, t: &Table) -> CliResult<()> {
    let bytes = match cli.format {
        Format::Csv => t.to_csv()?,
        Format::Json => t.to_json()?,
    };
    emit(cli.out.as_deref(), &bytes)
}

fn emit_distribution(cli: &Cli, d: &AnyDistribution) -> CliResult<()> {
    let mut s = d.to_json()?;
    s.push('\n');
    emit(cli.out.as_deref(), s.as_bytes())
}

fn parse_k(s: &str) -> CliResult<Vec<i32>> {
    s.split(',')
        .map(|p| p.trim().parse::<i32>().map_err(|_| CliError::Usage(format!("bad moment order {s:?}"))))
        .collect()
}

fn filter_run(cli: &Cli, config: &str) -> CliResult<()> {
    let mut cfg = ScenarioConfig::from_json(&commands::read_arg(config)?)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = scenario::run(&cfg, threads()?)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_atomic(&dir.join("report.json"), &json)?;
            write_atomic(&dir.join("report.csv"), &report.to_csv()?)?;
            Ok(())
        }
        None => match cli.format {
            Format::Json => emit(None, &json),
            Format::Csv => emit(None, &report.to_csv()?),
        },
    }
}

fn selftest() -> CliResult<()> {
    let results = dirkit::selftest::run();
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {} [{:.2}s]", r.name, r.detail, r.seconds);
    }
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<()> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    match &cli.command {
        Command::Pdf { dist, grid, at } => {
            if *grid == 0 {
                return Err(CliError::Usage("--grid must be positive".into()));
            }
            let d = commands::load_distribution(dist)?;
            emit_table(cli, &commands::pdf(&d, *grid, at.as_deref())?)
        }
        Command::Moment { dist, k, numerical } => {
            let d = commands::load_distribution(dist)?;
            let orders = k.iter().map(|s| parse_k(s)).collect::<CliResult<Vec<_>>>()?;
            let width = orders[0].len();
            if orders.iter().any(|o| o.len() != width) {
                return Err(CliError::Usage("all --k values need the same number of orders".into()));
            }
            let mut header: Vec<String> = (1..=width).map(|i| if width == 1 { "k".into() } else { format!("k{i}") }).collect();
            header.extend(["re".into(), "im".into()]);
            let rows = orders
                .iter()
                .map(|o| {
                    let m = commands::moment(&d, o, *numerical)?;
                    let mut row: Vec<f64> = o.iter().map(|&v| v as f64).collect();
                    row.extend([m.re, m.im]);
                    Ok(row)
                })
                .collect::<CliResult<_>>()?;
            emit_table(cli, &Table { header, rows })
        }
        Command::Fit { family, samples, components } => {
            if *components == 0 {
                return Err(CliError::Usage("--components must be positive".into()));
            }
            let opts = FitOptions {
                components: *components,
                seed: cli.seed.unwrap_or(0),
                tol: cli.tol,
            };
            emit_distribution(cli, &commands::fit(family, samples, &opts)?)
        }
        Command::Sample { dist, n } => {
            let d = commands::load_distribution(dist)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
            let rows = d.sample(*n, &mut rng);
            emit_table(
                cli,
                &Table {
                    header: d.coordinate_names(),
                    rows,
                },
            )
        }
        Command::Approx { dist, scheme } => {
            let d = commands::load_distribution(dist)?;
            emit_distribution(cli, &commands::approx(&d, scheme)?)
        }
        Command::FilterRun { config } => filter_run(cli, config),
        Command::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
