//! Command-line arguments and the resolved [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use specalc_core::convexity::{DEFAULT_CERTIFY_TOL, DEFAULT_LEMMA_TOL};
use specalc_core::mollify::{DEFAULT_ORDER, DEFAULT_SIGMAS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eig,
    Eval,
    Derive,
    Certify,
    Lemma,
    Mollify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Eval => "eval",
            Command::Derive => "derive",
            Command::Certify => "certify",
            Command::Lemma => "lemma",
            Command::Mollify => "mollify",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ToleranceOverrides {
    pub tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub coalesce_tol: Option<f64>,
}

/// Everything a run needs. Serialized into every report as the config echo; the output
/// destination is left out so that reports written to different files compare equal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub field: Option<String>,
    pub matrix: Option<PathBuf>,
    pub p: Option<PathBuf>,
    pub q: Option<PathBuf>,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub points: usize,
    pub seed: u64,
    pub tolerances: ToleranceOverrides,
    pub sigmas: Vec<f64>,
    pub order: usize,
    pub grid: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Defaults for `command`; the CLI overwrites what the user passed.
    pub fn new(command: Command) -> Self {
        let (dims, trials) = match command {
            Command::Mollify => (vec![2], 50),
            _ => (vec![2, 3, 4], 100),
        };
        Self {
            command,
            field: None,
            matrix: None,
            p: None,
            q: None,
            dims,
            trials,
            points: 1000,
            seed: 0,
            tolerances: ToleranceOverrides::default(),
            sigmas: DEFAULT_SIGMAS.to_vec(),
            order: DEFAULT_ORDER,
            grid: 3,
            output: None,
            format: Format::Json,
        }
    }

    pub fn certify_tol(&self) -> f64 {
        self.tolerances.tol.unwrap_or(DEFAULT_CERTIFY_TOL)
    }

    pub fn lemma_tol(&self) -> f64 {
        self.tolerances.tol.unwrap_or(DEFAULT_LEMMA_TOL)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "specalc",
    version,
    about = "Spectral functions of symmetric matrices: derivatives and convexity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random draw
    #[arg(long, env = "SPECALC_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Eigendecomposition of a matrix file
    Eig {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// f(M) = g(λ(M))
    Eval {
        #[arg(long)]
        field: String,
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// First and second derivatives of f along P + tQ at t = 0
    Derive {
        #[arg(long)]
        field: String,
        #[arg(long = "P", visible_alias = "p")]
        p: PathBuf,
        #[arg(long = "Q", visible_alias = "q")]
        q: PathBuf,
        /// Relative spectral gap below which the spectrum counts as degenerate
        #[arg(long)]
        gap_tol: Option<f64>,
        /// Relative eigenvalue distance below which pairs use the coalescence limit
        #[arg(long)]
        coalesce_tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded search for lines with negative second derivative
    Certify {
        #[arg(long)]
        field: String,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
        dims: Vec<usize>,
        /// Trials per dimension
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Violation threshold on d2
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// (∂ₓg − ∂ᵧg)(x − y) ≥ 0 on seeded points of an arity-2 field
    Lemma {
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian smoothing of a field followed by certification at each bandwidth
    Mollify {
        #[arg(long)]
        field: String,
        /// Decreasing bandwidths
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIGMAS)]
        sigmas: Vec<f64>,
        /// Gauss–Legendre nodes per panel
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// Grid points per axis for the distance estimate; 0 skips it
        #[arg(long, default_value_t = 3)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses command-line arguments (including the program name).
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (mut c, common) = match cli.command {
        Sub::Eig { matrix, common } => {
            let mut c = RunConfig::new(Command::Eig);
            c.matrix = Some(matrix);
            (c, common)
        }
        Sub::Eval { field, matrix, common } => {
            let mut c = RunConfig::new(Command::Eval);
            c.field = Some(field);
            c.matrix = Some(matrix);
            (c, common)
        }
        Sub::Derive { field, p, q, gap_tol, coalesce_tol, common } => {
            let mut c = RunConfig::new(Command::Derive);
            c.field = Some(field);
            c.p = Some(p);
            c.q = Some(q);
            c.tolerances.gap_tol = gap_tol;
            c.tolerances.coalesce_tol = coalesce_tol;
            (c, common)
        }
        Sub::Certify { field, dims, trials, tol, common } => {
            let mut c = RunConfig::new(Command::Certify);
            c.field = Some(field);
            c.dims = dims;
            c.trials = trials;
            c.tolerances.tol = tol;
            (c, common)
        }
        Sub::Lemma { field, points, tol, common } => {
            let mut c = RunConfig::new(Command::Lemma);
            c.field = Some(field);
            c.points = points;
            c.tolerances.tol = tol;
            (c, common)
        }
        Sub::Mollify { field, sigmas, order, dims, trials, tol, grid, common } => {
            let mut c = RunConfig::new(Command::Mollify);
            c.field = Some(field);
            c.sigmas = sigmas;
            c.order = order;
            c.dims = dims;
            c.trials = trials;
            c.tolerances.tol = tol;
            c.grid = grid;
            (c, common)
        }
    };
    c.seed = common.seed;
    c.output = common.output;
    c.format = common.format;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certify_flags() {
        let c = parse_args([
            "specalc",
            "certify",
            "--field",
            "neg_log_det",
            "--dims",
            "2,3",
            "--trials",
            "200",
            "--seed",
            "42",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Certify);
        assert_eq!(c.dims, vec![2, 3]);
        assert_eq!((c.trials, c.seed), (200, 42));
        assert_eq!(c.certify_tol(), DEFAULT_CERTIFY_TOL);
    }

    #[test]
    fn derive_accepts_upper_case_flags() {
        let c = parse_args(["specalc", "derive", "--field", "sum", "--P", "p.json", "--Q", "q.json"]).unwrap();
        assert_eq!(c.p, Some(PathBuf::from("p.json")));
        assert_eq!(c.q, Some(PathBuf::from("q.json")));
    }

    #[test]
    fn missing_field_is_a_usage_error() {
        assert!(parse_args(["specalc", "certify"]).is_err());
    }
}
