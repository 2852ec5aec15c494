use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tfq_core::cli::{self, Command, ExperimentConfig, EXIT_CONFIG, EXIT_FAILED};
use tfq_core::io::read_file;
use tfq_core::TfqError;

/// Finite time-frequency quantization experiments.
#[derive(Parser)]
#[command(name = "tfq", version)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,

    /// JSON experiment config; unset fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress stdout output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Run the exact-identity suites and print a pass/fail table.
    Verify,
    /// Diagnostics for every τ in the config, one CSV row each.
    Sweep,
    /// Inverse-symbol and composition reports.
    Wiener,
    /// Symbol class norms and signal modulation norms.
    Norms,
    /// Channel-matrix decay envelopes.
    Channel,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Verify => Command::Verify,
            Cmd::Sweep => Command::Sweep,
            Cmd::Wiener => Command::Wiener,
            Cmd::Norms => Command::Norms,
            Cmd::Channel => Command::Channel,
        }
    }
}

fn load(args: &Args) -> Result<ExperimentConfig, TfqError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_json(&read_file(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd = Command::from(args.cmd);
    let cfg = match load(&args).and_then(|c| c.validate(cmd).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(EXIT_CONFIG);
        }
    };
    match cli::run(cmd, &cfg, &args.out, args.quiet) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            exit(EXIT_FAILED)
        }
    }
}
