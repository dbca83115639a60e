//! Command-line front end for `polyfreg`.

pub mod commands;
pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ConfigMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values, or unreadable / malformed input files.
    Config(String),
    /// Solver or aggregation failures beyond the tolerated budget.
    Numerical(String),
    /// Inputs with the wrong shape: too few samples per stratum, mismatched
    /// grids or lengths.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<polyfreg::Error> for CliError {
    fn from(e: polyfreg::Error) -> Self {
        use polyfreg::Error as E;
        let msg = e.to_string();
        match e {
            E::SolverFailure(_) | E::DegenerateAggregation | E::EmptyModelList => CliError::Numerical(msg),
            E::LengthMismatch { .. }
            | E::NonFinite(_)
            | E::GridMismatch
            | E::GridNotCovered { .. }
            | E::NonMonotonePositions
            | E::EmptyDataset
            | E::KappaExceeded { .. }
            | E::OrderMismatch { .. }
            | E::InsufficientStratum { .. } => CliError::Data(msg),
            E::InvalidInterval { .. }
            | E::TooFewNodes(_)
            | E::InvalidGrid(_)
            | E::InvalidLambda(_)
            | E::InvalidLabel(_)
            | E::Parse(_)
            | E::Io(_)
            | E::Csv(_)
            | E::Json(_) => CliError::Config(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "polyfreg",
    version,
    about = "Polynomial functional regression with multi-penalty regularization and model aggregation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Error curves of every λ model and their aggregate on the cosine toy problem.
    ToyCurve,
    /// Fit one model per λ on a labeled dataset and store them.
    Fit,
    /// Aggregate stored (or freshly fitted) models by least squares.
    Aggregate,
    /// Repeated split / fit / aggregate / score runs on labeled profiles.
    Evaluate,
    /// Predict with stored models and, when present, their aggregate.
    Predict,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ToyCurve => "toy-curve",
            Command::Fit => "fit",
            Command::Aggregate => "aggregate",
            Command::Evaluate => "evaluate",
            Command::Predict => "predict",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long, global = true, env = "POLYFREG_THREADS", value_name = "INT")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "INT")]
    pub n_max: Option<usize>,
    /// Polynomial order p.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: Option<u8>,
    /// Candidate λ values: `a,b,c` for every degree or `a,b;c;d,e` per degree.
    #[arg(long, global = true, value_name = "CSVLIST", allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    #[arg(long, global = true, value_name = "INT")]
    pub runs: Option<usize>,
    /// Decision threshold on predicted labels.
    #[arg(long, global = true, value_name = "REAL", allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Use generated stenosis-like profiles instead of `--data`.
    #[arg(long, global = true)]
    pub synthetic_surrogate: bool,
    #[arg(long, global = true, value_name = "INT")]
    pub grid_nodes: Option<usize>,
    /// Labeled profile CSV (raw or pre-gridded).
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Directory with stored models.
    #[arg(long, global = true, value_name = "DIR")]
    pub model_dir: Option<PathBuf>,
    /// Profiles to predict on.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Extra `key=value` config overrides.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    /// Config file overlaid with `--set` pairs and then the dedicated flags.
    pub fn resolve_config(&self) -> Result<ConfigMap, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ConfigMap::load(path)?,
            None => ConfigMap::default(),
        };
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
            cfg.set(k.trim(), v.trim());
        }
        if let Some(v) = self.seed {
            cfg.set("seed", v);
        }
        if let Some(v) = self.n_max {
            cfg.set("toy.n_max", v);
        }
        if let Some(v) = self.order {
            cfg.set("model.order", v);
        }
        if let Some(v) = &self.lambda_grid {
            cfg.set("model.lambda_grid", v);
        }
        if let Some(v) = self.runs {
            cfg.set("evaluate.runs", v);
        }
        if let Some(v) = self.threshold {
            cfg.set("evaluate.threshold", v);
        }
        if let Some(v) = self.grid_nodes {
            cfg.set("grid.nodes", v);
        }
        if self.synthetic_surrogate {
            cfg.set("evaluate.synthetic_surrogate", true);
        }
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("polyfreg {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 1\nmodel.order = 1\n").unwrap();
        let cli = Cli::try_parse_from([
            "polyfreg",
            "toy-curve",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "5",
            "--set",
            "toy.noise_sigma=0.2",
        ])
        .unwrap();
        let cfg = cli.common.resolve_config().unwrap();
        assert_eq!(cfg.raw("seed"), Some("5"));
        assert_eq!(cfg.raw("model.order"), Some("1"));
        assert_eq!(cfg.raw("toy.noise_sigma"), Some("0.2"));
    }

    #[test]
    fn order_outside_range_is_a_usage_error() {
        assert_eq!(run(["polyfreg", "toy-curve", "--order", "3"]), EXIT_CONFIG);
        assert_eq!(run(["polyfreg", "frobnicate"]), EXIT_CONFIG);
    }

    #[test]
    fn error_mapping() {
        assert_eq!(
            CliError::from(polyfreg::Error::DegenerateAggregation).exit_code(),
            EXIT_NUMERICAL
        );
        assert_eq!(
            CliError::from(polyfreg::Error::Parse("x".into())).exit_code(),
            EXIT_CONFIG
        );
        let strata = polyfreg::Error::InsufficientStratum {
            needed_pos: 4,
            needed_neg: 16,
            have_pos: 1,
            have_neg: 2,
        };
        assert_eq!(CliError::from(strata).exit_code(), EXIT_DATA);
    }
}
