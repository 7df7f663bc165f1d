//! `tomo`: photon-number tomograms of Gaussian states from the command line.
//!
//! Exit codes: 0 ok, 1 input error, 2 computation rejected, 3 negativity
//! witness found.

mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "tomo",
    version,
    about = "Photon-number tomograms of Gaussian states"
)]
struct Cli {
    /// Include wall time in manifests (outputs are then no longer byte-identical across runs).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the uncertainty relations of a state.
    Validate(StateArg),
    /// Tabulate ω(n, α), optionally against an oracle.
    Tomogram(TomogramArgs),
    /// Vacuum probability and Hermite kernel at each α.
    P0(P0Args),
    /// Reconstruct a truncated density matrix from a state or a tomogram table.
    Reconstruct(ReconstructArgs),
    /// Scan for negative tomogram values.
    Positivity(PositivityArgs),
    /// Compare the Hermite path with the quadrature and Fock oracles.
    OracleCompare(OracleCompareArgs),
}

#[derive(Args, Debug)]
struct StateArg {
    /// State specification (JSON).
    state: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Oracle {
    None,
    Quadrature,
    Fock,
}

#[derive(Args, Debug, Clone)]
struct OracleOptions {
    /// Quadrature node spacing (default 0.05 for one mode, 0.2 for two).
    #[arg(long)]
    spacing: Option<f64>,
    /// Quadrature box half-width in standard deviations.
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    /// Fock cutoff for the Fock-space oracle.
    #[arg(long, default_value_t = 60)]
    fock_cutoff: usize,
}

#[derive(Args, Debug)]
struct TomogramArgs {
    state: PathBuf,
    /// Photon numbers: "a..b", "a,b,c" or "k"; once for all modes or once per mode.
    #[arg(long = "n", default_values_t = vec!["0..5".to_string()])]
    n: Vec<String>,
    /// Displacements: "re,im;…" (2N reals per point), "grid:HALF:POINTS" or
    /// "polar:RADIAL:ANGULAR:RADIUS[:RE:IM]".
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Oracle::None)]
    oracle: Oracle,
    #[command(flatten)]
    oracle_options: OracleOptions,
    /// Output file; CSV output gets a `<file>.manifest.json` sidecar.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct P0Args {
    state: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// State specification (JSON); omit when reading --tomogram-csv.
    state: Option<PathBuf>,
    /// Tomogram table as written by `tomo tomogram --format csv`.
    #[arg(long, conflicts_with = "state")]
    tomogram_csv: Option<PathBuf>,
    /// Ordering parameter(s) s in (-1, 0].
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Fock cutoff per mode (default 12 for one mode, 4 for two).
    #[arg(long)]
    cutoff: Option<usize>,
    /// Polar grid "RADIAL,ANGULAR,RADIUS".
    #[arg(long)]
    grid: Option<String>,
    /// Photon-number summation cap per mode.
    #[arg(long)]
    n_max: Option<usize>,
    /// Grid centre "re,im" per mode.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScanPathArg {
    Hermite,
    Quadrature,
}

#[derive(Args, Debug)]
struct PositivityArgs {
    state: PathBuf,
    #[arg(long, default_value_t = 15)]
    n_max: usize,
    /// Half-width of the square α box per mode.
    #[arg(long, default_value_t = 3.0)]
    alpha_box: f64,
    /// Grid points per axis of the α box.
    #[arg(long, default_value_t = 9)]
    resolution: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = ScanPathArg::Hermite)]
    path: ScanPathArg,
    #[command(flatten)]
    oracle_options: OracleOptions,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CompareWith {
    Quadrature,
    Fock,
    Both,
}

#[derive(Args, Debug)]
struct OracleCompareArgs {
    state: PathBuf,
    #[arg(long = "n", default_values_t = vec!["0..10".to_string()])]
    n: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, value_enum, default_value_t = CompareWith::Both)]
    oracle: CompareWith,
    /// Largest accepted |Δ|; exceeding it exits with code 2.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    oracle_options: OracleOptions,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TOMO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("TOMO_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(commands::EXIT_INPUT);
    }
    let started = std::time::Instant::now();
    let timing = cli.timing.then_some(started);
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a.state, timing),
        Command::Tomogram(a) => commands::tomogram(&a, timing),
        Command::P0(a) => commands::p0(&a, timing),
        Command::Reconstruct(a) => commands::reconstruct(&a, timing),
        Command::Positivity(a) => commands::positivity(&a, timing),
        Command::OracleCompare(a) => commands::oracle_compare(&a, timing),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
