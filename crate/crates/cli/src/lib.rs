//! The `dirac` command-line driver.
//!
//! Each subcommand builds a [`report::Report`] from a [`config::RunConfig`]
//! and writes it as CSV or JSON. Exit codes: 0 success or pass, 1 usage or
//! configuration error, 2 numerical failure, 3 check failed.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use report::Status;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] dirac_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dirac_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(E::Config(_) | E::UnsupportedGroup(_) | E::Dimension { .. } | E::NoChart(_))
            | CliError::Core(E::NotMember { .. }) => EXIT_USAGE,
            CliError::Core(_) => EXIT_NUMERIC,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dirac", version, about = "Analytic Dirac sequences on matrix groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalization constants C_t over the t grid.
    Normalize,
    /// Unit mass and tail concentration of phi_t.
    DiracCheck,
    /// phi_t * f against f on a grid of chart points.
    Mollify,
    /// Distance |Pi(phi_t) v - v| over the t grid.
    RepConverge,
    /// Crown-domain estimates p1, p2, u2 and fs.
    CrownCheck {
        /// p1, p2, u2, fs or all.
        estimate: Option<String>,
    },
    /// Jordan-Chevalley residuals and distance / growth bounds.
    DecompCheck {
        /// jc, growth, basis or compare.
        check: Option<String>,
    },
}

/// Flags mirror the config keys and override the config file.
#[derive(Args, Debug)]
struct Flags {
    /// key = value file read before the flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for integration; reports do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Catalog name such as SO(2), GL+(1), HEIS.
    #[arg(long, global = true)]
    group: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    /// Even gauge exponent p, or `default` for 4n.
    #[arg(long, global = true)]
    exponent: Option<String>,
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    t_grid: Option<String>,
    /// quadrature or mc.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Quadrature points per chart axis, or `auto`.
    #[arg(long, global = true)]
    points: Option<String>,
    /// Monte Carlo samples.
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// `auto`, `auto:TOL` or a norm radius.
    #[arg(long, global = true)]
    truncation: Option<String>,
    #[arg(long, global = true)]
    confidence: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
    /// Largest accepted final tail mass (dirac-check).
    #[arg(long, global = true)]
    threshold: Option<String>,
    /// Neighborhood radii (dirac-check).
    #[arg(long, global = true, value_name = "LIST")]
    radii: Option<String>,
    /// one, cos or gauss (mollify).
    #[arg(long, global = true)]
    function: Option<String>,
    /// Chart points `x,y,..;x,y,..` (mollify).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// trivial, standard or sym2 (rep-converge).
    #[arg(long, global = true)]
    rep: Option<String>,
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    vector: Option<String>,
    #[arg(long, global = true)]
    estimate: Option<String>,
    /// Shrinks the crown torus angles by 1 - margin.
    #[arg(long, global = true)]
    margin: Option<String>,
    /// Largest ||g|| sampled (crown-check, decomp-check).
    #[arg(long, global = true)]
    radius: Option<String>,
    /// Largest ||h|| of the real factor of crown points.
    #[arg(long, global = true)]
    h_radius: Option<String>,
    /// Number of sampled points (crown-check, decomp-check).
    #[arg(long, global = true)]
    count: Option<String>,
    #[arg(long, global = true)]
    k_max: Option<String>,
    #[arg(long, global = true)]
    check: Option<String>,
    /// Exponent n in e^{n d(g)} (growth check).
    #[arg(long, global = true)]
    n_exp: Option<String>,
    /// Smallest relative eigenvalue gap of sampled matrices.
    #[arg(long, global = true)]
    min_gap: Option<String>,
    #[arg(long, global = true)]
    cluster_tol: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("group", &self.group),
            ("n", &self.n),
            ("exponent", &self.exponent),
            ("t_grid", &self.t_grid),
            ("method", &self.method),
            ("points", &self.points),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("truncation", &self.truncation),
            ("confidence", &self.confidence),
            ("format", &self.format),
            ("out", &self.out),
            ("threshold", &self.threshold),
            ("radii", &self.radii),
            ("function", &self.function),
            ("grid", &self.grid),
            ("rep", &self.rep),
            ("vector", &self.vector),
            ("estimate", &self.estimate),
            ("margin", &self.margin),
            ("radius", &self.radius),
            ("h_radius", &self.h_radius),
            ("count", &self.count),
            ("k_max", &self.k_max),
            ("check", &self.check),
            ("n_exp", &self.n_exp),
            ("min_gap", &self.min_gap),
            ("cluster_tol", &self.cluster_tol),
        ]
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.flags.config {
        cfg.apply_file(path)?;
    }
    for (key, value) in cli.flags.overrides() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    match &cli.command {
        Command::CrownCheck { estimate: Some(e) } => cfg.set("estimate", e)?,
        Command::DecompCheck { check: Some(c) } => cfg.set("check", c)?,
        _ => {}
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(report::Report, RunConfig), CliError> {
    let cfg = build_config(cli)?;
    match cli.command {
        Command::Normalize => commands::normalize(cfg),
        Command::DiracCheck => commands::dirac_check(cfg),
        Command::Mollify => commands::mollify(cfg),
        Command::RepConverge => commands::rep_converge(cfg),
        Command::CrownCheck { .. } => commands::crown_check(cfg),
        Command::DecompCheck { .. } => commands::decomp_check(cfg),
    }
}

fn emit(report: &report::Report, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = report.render(cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.flags.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start {threads} threads: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = pool.install(|| execute(&cli)).and_then(|(report, cfg)| {
        emit(&report, &cfg)?;
        Ok(report.status)
    });
    match outcome {
        Ok(Some(Status::Fail)) => EXIT_FAILED,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
