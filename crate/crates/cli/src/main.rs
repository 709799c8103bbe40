//! `uturn`: turn detection and measurement validation for smartphone
//! U-turn tests.
//!
//! Every subcommand writes its outputs plus a `manifest.json` into one
//! output directory. The manifest records the resolved parameters, the
//! SHA-256 of each input, and the seed, and contains no timestamps, so
//! re-running the same command on the same inputs reproduces every
//! output byte for byte.
//!
//! Exit codes: 0 success, 1 partial or data failure (some inputs could
//! not be processed, or the data cannot support the analysis), 2 usage
//! or configuration error.

mod cmds;
mod config;
mod manifest;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "uturn", version, about = "Turn detection and measurement validation for smartphone U-turn tests")]
struct Cli {
    /// Output directory (default: $UTURN_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Flat key=value parameter file; explicit flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every seeded computation in this run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect turns in sensor streams and summarize each test
    Detect(cmds::detect::Args),
    /// Score detected turns against reference annotations
    Score(cmds::score::Args),
    /// Agreement between two paired measurement columns (ICC, Bland-Altman)
    Agree(cmds::agree::Args),
    /// Test-retest reliability as a function of how many tests are aggregated
    Reliability(cmds::reliability::Args),
    /// Correlate turn speed with disability covariates and compare groups
    Correlate(cmds::correlate::Args),
    /// Generate synthetic sessions or cohorts with ground-truth annotations
    Synth(cmds::synth::Args),
    /// Summary tables and a Bland-Altman scatter from earlier outputs
    Report(cmds::report::Args),
}

/// Everything a subcommand needs besides its own flags.
pub struct Ctx {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub config: FileConfig,
}

impl Ctx {
    /// Resolves one numeric parameter: flag beats config file beats default.
    pub fn param_f64(&self, key: &str, flag: Option<f64>, default: f64) -> anyhow::Result<f64> {
        Ok(match flag {
            Some(v) => v,
            None => self.config.get_f64(key)?.unwrap_or(default),
        })
    }

    pub fn param_usize(&self, key: &str, flag: Option<usize>, default: usize) -> anyhow::Result<usize> {
        Ok(match flag {
            Some(v) => v,
            None => self.config.get_usize(key)?.unwrap_or(default),
        })
    }

    pub fn param_str<'a>(&'a self, key: &str, flag: Option<&'a str>, default: &'a str) -> &'a str {
        flag.or_else(|| self.config.get_str(key)).unwrap_or(default)
    }

    pub fn create_out_dir(&self) -> anyhow::Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| anyhow::anyhow!("creating output directory {}: {e}", self.out_dir.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let config = match FileConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("UTURN_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx { out_dir, seed: cli.seed, config };
    match cli.command {
        Command::Detect(args) => cmds::detect::run(&ctx, &args),
        Command::Score(args) => cmds::score::run(&ctx, &args),
        Command::Agree(args) => cmds::agree::run(&ctx, &args),
        Command::Reliability(args) => cmds::reliability::run(&ctx, &args),
        Command::Correlate(args) => cmds::correlate::run(&ctx, &args),
        Command::Synth(args) => cmds::synth::run(&ctx, &args),
        Command::Report(args) => cmds::report::run(&ctx, &args),
    }
}
