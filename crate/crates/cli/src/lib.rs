//! Command-line experiment runner for `rfsched`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod histogram;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rfsched",
    version,
    about = "Stochastic charging/sampling schedules for RF-powered sensor nodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the experiment matrix and write results.csv, metadata.txt and plot data.
    Run(Overrides),
    /// Write surplus-energy histograms of each policy's single-slot schedule.
    Histogram(Overrides),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Policy: spsaa, min_gain, avg_gain or max_gain. Repeatable.
    #[arg(long)]
    pub policy: Vec<String>,
    /// Channel `kind[:param]`: gaussian, rayleigh, rician or fixed. Repeatable.
    #[arg(long)]
    pub channel: Vec<String>,
    /// Harvester efficiency. Repeatable.
    #[arg(long)]
    pub eta: Vec<String>,
    /// Sweep `eta=a:b:step` or `horizon=a:b:step`. Repeatable.
    #[arg(long)]
    pub sweep: Vec<String>,
    /// Number of slots per episode. Repeatable.
    #[arg(long)]
    pub horizon: Vec<String>,
    /// single or multi. Repeatable.
    #[arg(long)]
    pub mode: Vec<String>,
    /// Master seed. Repeatable.
    #[arg(long)]
    pub seed: Vec<String>,
    #[arg(long)]
    pub episodes: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set")]
    pub set: Vec<String>,
}

impl Overrides {
    /// Config file pairs followed by flag pairs; flags win.
    pub fn pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                config::parse_text(&text)?
            }
            None => Vec::new(),
        };
        let mut push = |key: &str, values: &[String]| {
            if !values.is_empty() {
                pairs.push((key.to_string(), values.join(",")));
            }
        };
        push("policy", &self.policy);
        push("channel.kinds", &self.channel);
        push("model.eta", &self.eta);
        push("sim.horizon", &self.horizon);
        push("sim.mode", &self.mode);
        push("seed", &self.seed);
        if let Some(e) = &self.episodes {
            pairs.push(("sim.episodes".into(), e.clone()));
        }
        if let Some(out) = &self.out {
            pairs.push(("output.dir".into(), out.display().to_string()));
        }
        for s in &self.sweep {
            let (key, range) = s
                .split_once('=')
                .ok_or_else(|| CliError::invalid("sweep", format!("expected key=a:b:step, got `{s}`")))?;
            let key = match key.trim() {
                "eta" => "sweep.eta",
                "horizon" | "T" => "sweep.horizon",
                other => return Err(CliError::UnknownKey(format!("sweep.{other}"))),
            };
            pairs.push((key.into(), range.trim().into()));
        }
        for s in &self.set {
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| CliError::invalid("set", format!("expected key=value, got `{s}`")))?;
            config::check_key(key.trim())?;
            pairs.push((key.trim().into(), value.trim().into()));
        }
        Ok(pairs)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::from_pairs(&self.pairs()?)
    }
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Run(o) => {
            let cfg = o.resolve()?;
            let out = experiment::run(&cfg)?;
            let unconverged = out.rows.iter().filter(|r| !r.summary.converged).count();
            let mut msg = format!("{} rows written to {}", out.rows.len(), cfg.out_dir.display());
            if unconverged > 0 {
                msg.push_str(&format!(" ({unconverged} above the gap-variance target)"));
            }
            Ok(msg)
        }
        Command::Histogram(o) => {
            let cfg = o.resolve()?;
            let rows = experiment::run_histograms(&cfg)?;
            Ok(format!(
                "{} histograms written to {}",
                rows.len(),
                cfg.out_dir.display()
            ))
        }
    }
}

/// Parses `args`, runs, reports on stdout/stderr and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
