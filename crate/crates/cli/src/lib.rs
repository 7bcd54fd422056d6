//! Command-line driver for `satcycles`. Every subcommand writes one CSV
//! table (see [`table`]) to stdout or to `--out`.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use satcycles::{FinderOptions, Params};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "satcycles", version, about = "Limit cycles of x' = a x + (b - a) sat(x) + mu sin t")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dynamical regime, the one-zone cycle bound and bifurcation constants
    Regime(Common),
    /// All limit cycles with zonal type, multiplier and stability
    Cycles(Common),
    /// Cycle counts over a grid of mu values
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        mu_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_max: f64,
        /// Number of mu values, at least 2
        #[arg(long, default_value_t = 41)]
        n: usize,
        /// Comma-separated eps values; defaults to --eps
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps_list: Vec<f64>,
    },
    /// Averaging function M and its derivatives at given points
    Melnikov {
        #[command(flatten)]
        common: Common,
        /// Comma-separated x values
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Zero set of the shifted averaging function as polylines
    Zeroset {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 400)]
        n: usize,
    },
    /// Bifurcation constants c, mu1, mu2, x1
    Bifvalues(Common),
    /// Crossing times of three-zonal cycles and both residual systems
    Crossings(Common),
    /// A periodic orbit in the coordinates (x, -mu sin t, -mu cos t)
    Orbit3d {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
}

/// Flags shared by every subcommand. Values left out fall back to the
/// `--config` file and then to the defaults.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Forcing amplitude [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Scale of the piecewise-linear field [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Constant bias [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bisection width for cycle roots [default: 1e-11]
    #[arg(long)]
    pub tol_root: Option<f64>,
    /// Residual threshold for accepted crossing solutions [default: 1e-10]
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// Points of the displacement scan [default: 4096]
    #[arg(long)]
    pub grid: Option<usize>,
    /// key = value file with defaults for the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub params: Params,
    pub finder: FinderOptions,
    pub tol_residual: f64,
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<Settings, CliError> {
        let cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let pick = |flag: Option<f64>, key: &str| -> Result<Option<f64>, CliError> {
            Ok(match flag {
                Some(v) => Some(v),
                None => cfg.get(key)?,
            })
        };
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Usage(format!("missing --{key} (flag or config)")))
        };
        let a = need(pick(self.a, "a")?, "a")?;
        let b = need(pick(self.b, "b")?, "b")?;
        let params = Params::new(a, b, pick(self.mu, "mu")?.unwrap_or(0.0))
            .with_eps(pick(self.eps, "eps")?.unwrap_or(1.0))
            .with_lambda(pick(self.lambda, "lambda")?.unwrap_or(0.0));
        params.validate()?;

        let defaults = FinderOptions::default();
        let grid = match self.grid {
            Some(g) => Some(g),
            None => cfg.get("grid")?,
        };
        let finder = FinderOptions {
            grid: grid.unwrap_or(defaults.grid),
            tol_root: pick(self.tol_root, "tol_root")?.unwrap_or(defaults.tol_root),
            ..defaults
        };
        Ok(Settings {
            params,
            finder,
            tol_residual: pick(self.tol_residual, "tol_residual")?
                .unwrap_or(satcycles::crossings::RESIDUAL_TARGET),
            out: self.out.clone(),
        })
    }
}

/// Runs one parsed command, writing its table and returning the text that
/// was written.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    use commands::*;
    let (settings, table) = match &cli.command {
        Command::Regime(c) => {
            let s = c.resolve()?;
            let t = regime(&s)?;
            (s, t)
        }
        Command::Cycles(c) => {
            let s = c.resolve()?;
            let t = cycles(&s)?;
            (s, t)
        }
        Command::Scan {
            common,
            mu_min,
            mu_max,
            n,
            eps_list,
        } => {
            let s = common.resolve()?;
            let t = scan(&s, *mu_min, *mu_max, *n, eps_list)?;
            (s, t)
        }
        Command::Melnikov { common, x } => {
            let s = common.resolve()?;
            let t = melnikov(&s, x)?;
            (s, t)
        }
        Command::Zeroset { common, n } => {
            let s = common.resolve()?;
            let t = zeroset(&s, *n)?;
            (s, t)
        }
        Command::Bifvalues(c) => {
            let s = c.resolve()?;
            let t = bifvalues(&s)?;
            (s, t)
        }
        Command::Crossings(c) => {
            let s = c.resolve()?;
            let t = crossings(&s)?;
            (s, t)
        }
        Command::Orbit3d { common, x0, n } => {
            let s = common.resolve()?;
            let t = orbit3d(&s, *x0, *n)?;
            (s, t)
        }
    };
    let text = table.emit()?;
    match &settings.out {
        Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(text)
}
