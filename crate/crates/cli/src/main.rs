//! `symcube`: build, verify and transfer cubature formulas; print count
//! tables and lower bounds.
//!
//! Exit codes: 0 success, 1 verification failure or table mismatch,
//! 2 precondition violation, 3 I/O or schema error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] symcube::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use symcube::Error as E;
        match self {
            CliError::Io { .. } => 3,
            CliError::Core(E::Schema(_) | E::InvalidWeight(_) | E::InsufficientMoments { .. }) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
        }
    }
}

/// What a command reports back besides its printed output.
pub enum Status {
    Ok,
    /// Verification failed or a table did not match.
    Failed,
}

#[derive(Parser)]
#[command(name = "symcube", version, about = "Few-point cubature formulas of degree 5 and 7")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Lebesgue,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Seq {
    Std,
    Variant,
    Delayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SphereSource {
    /// Regular simplex construction, (d+1)(d+2) points at degree 5.
    Simplex,
    /// Smolyak rule for exp(-|x|²) projected onto the sphere.
    Projected,
    /// Axis families, 2d² points at degree 5.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransferTo {
    Lebesgue,
    Gaussian,
    Sphere,
}

#[derive(Subcommand)]
enum Command {
    /// Build a degree 5 or 7 formula for a product weight.
    Build {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, conflicts_with = "moments")]
        weight: Option<Builtin>,
        /// Moments files, comma separated; one per coordinate with --general
        /// or a single file used for every coordinate.
        #[arg(long, value_delimiter = ',')]
        moments: Vec<PathBuf>,
        /// Use the construction for product weights whose factors may differ.
        #[arg(long)]
        general: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the exactness of a formula against its declared target.
    Verify {
        file: PathBuf,
        /// Degree to test; defaults to the declared degree.
        #[arg(long)]
        degree: Option<usize>,
        /// Relative tolerance; defaults to SYMCUBE_TOL or 1e-9 (1e-8 above degree 5).
        #[arg(long)]
        tol: Option<f64>,
        /// Write a JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print knot-count tables.
    Counts {
        /// Golden table number 1-5.
        #[arg(long, conflicts_with_all = ["degree", "dims"])]
        table: Option<usize>,
        /// Compare against the embedded golden values (all tables without --table).
        #[arg(long)]
        check: bool,
        #[arg(long, requires = "dims")]
        degree: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, value_enum, default_value = "std")]
        seq: Seq,
    },
    /// Move a formula to another weight with few added knots.
    Transfer {
        file: PathBuf,
        #[arg(long, value_enum, conflicts_with = "moments")]
        to: Option<TransferTo>,
        #[arg(long, value_delimiter = ',')]
        moments: Vec<PathBuf>,
        /// Degree parameter: the formula must be exact of degree 2k+1.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Möller's lower bound for centrally symmetric weights.
    Bounds {
        #[arg(long)]
        degree: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Condition number Σ|a_i| / mass.
    Condition { file: PathBuf },
    /// Build a formula for the surface measure of the unit sphere.
    Sphere {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "simplex")]
        source: SphereSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Build {
            degree,
            dim,
            weight,
            moments,
            general,
            out,
        } => commands::build(degree, dim, weight, &moments, general, out.as_deref()),
        Command::Verify {
            file,
            degree,
            tol,
            report,
        } => commands::verify(&file, degree, tol, report.as_deref()),
        Command::Counts {
            table,
            check,
            degree,
            dims,
            seq,
        } => commands::counts(table, check, degree, &dims, seq),
        Command::Transfer {
            file,
            to,
            moments,
            k,
            out,
        } => commands::transfer(&file, to, &moments, k, out.as_deref()),
        Command::Bounds { degree, dims } => commands::bounds(degree, &dims),
        Command::Condition { file } => commands::condition(&file),
        Command::Sphere {
            degree,
            dim,
            source,
            out,
        } => commands::sphere(degree, dim, source, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
