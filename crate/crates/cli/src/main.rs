//! `avatar-cafe`: run the cafe service, replay scripted days, and report work
//! metrics.

mod report;
mod serve;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use avatar_core::protocol::ChannelModel;
use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {path}: {message}")]
    Config { path: String, message: String },
    #[error("bind error: {addr}: {message}")]
    Bind { addr: String, message: String },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "avatar-cafe", version, about = "Avatar robot cafe simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the cafe service and accept operator connections.
    Serve(serve::ServeArgs),
    /// Run a scenario script headless and write its event log.
    Simulate {
        script: PathBuf,
        /// Overrides the script's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Event log path; defaults to `<script stem>.events.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay event logs and survey files into work metrics.
    Report(report::ReportArgs),
    /// Print a built-in scenario script.
    Scenario {
        /// `canned` (full service day) or `empty`.
        kind: String,
        #[arg(long, default_value_t = 4)]
        sessions: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_channel(s: &str) -> Result<ChannelModel, String> {
    s.parse().map_err(|e: avatar_core::protocol::ProtocolError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve::run(args),
        Command::Simulate { script, seed, out } => simulate::run(&script, seed, out),
        Command::Report(args) => {
            let out = report::run(&args);
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            return if out.ok { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
        Command::Scenario { kind, sessions, seed } => simulate::print_builtin(&kind, sessions, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<CliError>() {
                Some(CliError::Config { .. }) | Some(CliError::Usage(_)) => 2,
                Some(CliError::Bind { .. }) => 3,
                None => 1,
            };
            ExitCode::from(code)
        }
    }
}
