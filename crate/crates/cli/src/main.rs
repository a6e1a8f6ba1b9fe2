//! `watt` command-line tool.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 3 when the
//! computation itself fails. Errors are reported on stderr as a single line
//! `error[<kind>]: <message>`. Tables go to stdout (or `--out`); logs go to
//! stderr and are controlled by `RUST_LOG`.

mod args;
mod commands;
mod error;
mod io;
mod manifest;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use error::{CliError, EXIT_USAGE};

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Balance(a) => commands::balance(a),
        Command::Truth(a) => commands::truth(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Generate(a) => commands::generate(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            // clap spreads its message over several lines before the usage block
            let text = e.to_string();
            let reason: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!(
                "error[usage]: {}",
                reason.join(" ").trim_start_matches("error: ")
            );
            std::process::exit(EXIT_USAGE);
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("{}", CliError::usage("threads", e.to_string()));
            std::process::exit(EXIT_USAGE);
        }
    };
    if let Err(e) = pool.install(|| run(&cli)) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
