use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use saddlesmith_cli::commands::{self, JobSpec};
use saddlesmith_cli::exit::CliError;
use saddlesmith_cli::payload::{IntegrandJson, NecklaceJson, NormalFormJson, VectorFieldJson};
use saddlesmith_cli::verify::{self, Level};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "saddlesmith",
    version,
    about = "Normal forms of resonant saddles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Fixed-point tolerance of the realization.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Twist parameter c, bypassing the automatic choice.
    #[arg(long, global = true)]
    c_override: Option<f64>,
    /// Radial quadrature nodes per ray.
    #[arg(long, global = true)]
    grid_radial: Option<usize>,
    /// Fibers on the y-circle.
    #[arg(long, global = true)]
    grid_y: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Formal modulus of a vector field.
    Normalize {
        #[arg(long)]
        input: PathBuf,
    },
    /// Realize a necklace as a normal form.
    Realize {
        #[arg(long)]
        input: PathBuf,
        /// Convergence CSV; defaults to `<output>.convergence.csv`.
        #[arg(long)]
        convergence: Option<PathBuf>,
    },
    /// Sampled periods of an integrand along a normal form.
    Period {
        /// Normal-form JSON as written by `realize`.
        #[arg(long)]
        input: PathBuf,
        /// Integrand JSON: `Σ coef·uⁿyᵐ` terms, optionally plus `−R`.
        #[arg(long)]
        integrand: PathBuf,
    },
    /// Realize a necklace and recover it from the periods of −R.
    Roundtrip {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the seeded property suite.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: Level,
    },
}

const CONVERGENCE_HEADER: &[&str] = &["iteration", "residual", "ratio"];
const PERIOD_HEADER: &[&str] = &[
    "j",
    "polarity",
    "Re h",
    "Im h",
    "Re f",
    "Im f",
    "tail_estimate",
];

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// CSV with an explicit header line, so empty tables still carry column names.
fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let job = JobSpec {
        tol: cli.tol,
        c_override: cli.c_override,
        radial_nodes: cli.grid_radial,
        y_nodes: cli.grid_y,
        seed: cli.seed,
    };
    job.validate()?;
    let out = cli.output.as_deref();
    match cli.command {
        Command::Normalize { input } => {
            let field: VectorFieldJson = read_json(&input)?;
            emit(out, &json(&commands::normalize(&field, &job)?)?)
        }
        Command::Realize { input, convergence } => {
            let data: NecklaceJson = read_json(&input)?;
            let (nf, rows) = commands::realize(&data, &job)?;
            emit(out, &json(&nf)?)?;
            let csv_path = convergence.or_else(|| out.map(|p| p.with_extension("convergence.csv")));
            match csv_path {
                Some(p) => fs::write(p, csv_bytes(CONVERGENCE_HEADER, &rows)?)?,
                None => eprint!(
                    "{}",
                    String::from_utf8_lossy(&csv_bytes(CONVERGENCE_HEADER, &rows)?)
                ),
            }
            Ok(())
        }
        Command::Period { input, integrand } => {
            let nf: NormalFormJson = read_json(&input)?;
            let g: IntegrandJson = read_json(&integrand)?;
            emit(
                out,
                &csv_bytes(PERIOD_HEADER, &commands::period_rows(&nf, &g)?)?,
            )
        }
        Command::Roundtrip { input } => {
            let data: NecklaceJson = read_json(&input)?;
            emit(out, &json(&commands::roundtrip(&data, &job)?)?)
        }
        Command::Verify { level } => {
            let report = verify::run(job.seed, level);
            emit(out, &json(&report)?)?;
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
            Ok(())
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("SADDLESMITH_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("ignoring SADDLESMITH_THREADS={v}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
