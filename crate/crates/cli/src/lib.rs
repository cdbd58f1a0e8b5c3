//! Batch driver for the prepayment engine: reads a scenario config, runs one
//! subcommand and writes CSV/JSON artifacts plus a manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::Config;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "prepay", version, about = "Prepayment option pricing and hedging")]
pub struct Cli {
    /// Scenario config file (TOML, flat dotted keys).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set cpr.model=rational`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Random seed (required)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths (even).
    #[arg(long, global = true)]
    pub paths: Option<u64>,
    /// Par swap quotes CSV
    #[arg(long, global = true)]
    pub curve: Option<PathBuf>,
    /// Normal swaption vol matrix CSV, in bps
    #[arg(long, global = true)]
    pub vols: Option<PathBuf>,
    /// Loan-level prepayment observations CSV
    #[arg(long, global = true)]
    pub loans: Option<PathBuf>,
    /// Output directory; one subdirectory per subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bootstrap the discount curve from par swap quotes.
    Bootstrap,
    /// Fit Hull-White (lambda, eta) to ATM swaption vols.
    Calibrate {
        /// `counterdiag10y` or a list such as `1Y-10Y,5Y-5Y`.
        #[arg(long)]
        instruments: Option<String>,
    },
    /// Deterministic mortgage schedule under a constant CPR.
    Schedule {
        /// Constant CPR as a decimal, e.g. 0.06
        #[arg(long)]
        cpr: Option<f64>,
    },
    /// Bin loan-level data by incentive and fit the logistic CPR curve.
    CprFit {
        #[arg(long)]
        bins: Option<u64>,
        /// Incentive range as `lo:hi`, e.g. `-0.015:0.04`.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
    },
    /// Monte Carlo price of the index amortizing swap.
    Price {
        /// Also write this many notional paths to CSV.
        #[arg(long)]
        export_paths: Option<u64>,
    },
    /// Build and evaluate static hedges.
    Hedge {
        /// linear | diag9 | single-5y5y | full | gamma | avg. Repeatable.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        /// Restrict swaption weights to be non-negative.
        #[arg(long)]
        no_short: bool,
    },
    /// Delta, Gamma and Vega profiles of the IAS and its hedges.
    Greeks,
    /// Reproduce a summary table.
    Report {
        #[command(subcommand)]
        table: Report,
    },
    /// Generate the synthetic loan-level data set.
    SynthLoans,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Report {
    /// IAS prices for bullet/annuity under rational and sigmoid prepayment.
    Table1,
}

fn absolute(p: &std::path::Path) -> CliResult<String> {
    let abs = std::path::absolute(p).map_err(|e| CliError::io(p, e))?;
    Ok(abs.to_string_lossy().into_owned())
}

/// Merges the config file, environment and flags in increasing precedence.
pub fn effective_config(cli: &Cli) -> CliResult<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    cfg.apply_env();
    for s in &cli.set {
        cfg.set(s)?;
    }
    use toml::Value;
    if let Some(s) = cli.seed {
        cfg.set_value("seed", Value::Integer(s as i64))?;
    }
    if let Some(n) = cli.paths {
        cfg.set_value("n_paths", Value::Integer(n as i64))?;
    }
    for (key, p) in [("curve", &cli.curve), ("vols", &cli.vols), ("loans", &cli.loans), ("out_dir", &cli.out)] {
        if let Some(p) = p {
            cfg.set_value(key, Value::String(absolute(p)?))?;
        }
    }
    match &cli.command {
        Command::Calibrate { instruments: Some(i) } => cfg.set_value("instruments", Value::String(i.clone()))?,
        Command::Schedule { cpr: Some(c) } => cfg.set_value("schedule.cpr", Value::Float(*c))?,
        Command::CprFit { bins, range } => {
            if let Some(b) = bins {
                cfg.set_value("fit.bins", Value::Integer(*b as i64))?;
            }
            if let Some(r) = range {
                let bad = || CliError::input(format!("--range '{r}' must look like lo:hi"));
                let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
                cfg.set_value("fit.lower", Value::Float(lo))?;
                cfg.set_value("fit.upper", Value::Float(hi))?;
            }
        }
        Command::Price { export_paths: Some(n) } => cfg.set_value("paths.export", Value::Integer(*n as i64))?,
        Command::Hedge { strategies, no_short } => {
            if !strategies.is_empty() {
                let list = strategies
                    .iter()
                    .flat_map(|s| s.split(','))
                    .map(|s| Value::String(s.trim().to_string()))
                    .collect();
                cfg.set_value("hedge.strategies", Value::Array(list))?;
            }
            if *no_short {
                cfg.set_value("hedge.no_short", Value::Boolean(true))?;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

/// Runs the parsed command and returns the artifact directory.
pub fn run(cli: &Cli) -> CliResult<PathBuf> {
    let cfg = effective_config(cli)?;
    match cli.command {
        Command::Bootstrap => commands::bootstrap(&cfg),
        Command::Calibrate { .. } => commands::calibrate(&cfg),
        Command::Schedule { .. } => commands::schedule(&cfg),
        Command::CprFit { .. } => commands::cpr_fit(&cfg),
        Command::Price { .. } => commands::price(&cfg),
        Command::Hedge { .. } => commands::hedge(&cfg),
        Command::Greeks => commands::greeks(&cfg),
        Command::Report { table: Report::Table1 } => commands::report_table1(&cfg),
        Command::SynthLoans => commands::synth_loans(&cfg),
    }
}
