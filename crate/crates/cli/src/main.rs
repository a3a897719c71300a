//! `lov`: command line front end for linear optical circuits.
//!
//! Exit codes: 0 success or equivalent, 1 negative verdict, 2 usage, input
//! or resource error, 3 internal invariant failure. Errors go to standard
//! error as `error[<kind>]: <message>`.

mod args;
mod commands;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Format};
use commands::{run, CliConfig};
use error::CliError;

fn command_name(c: &args::Command) -> &'static str {
    use args::Command::*;
    match c {
        Eval { .. } => "eval",
        Normalize { .. } => "normalize",
        Equiv { .. } => "equiv",
        Synth { .. } => "synth",
        Euler2 { .. } => "euler2",
        Euler3 { .. } => "euler3",
        CheckAxioms { .. } => "check-axioms",
        Rank { .. } => "rank",
        Fmt { .. } => "fmt",
    }
}

#[derive(Serialize)]
struct Envelope {
    command: &'static str,
    version: &'static str,
    result: serde_json::Value,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error[{}]: {e}", e.kind());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return fail(&CliError::Usage(first.to_string()));
        }
    };
    let outcome = CliConfig::from_args(&cli.global).and_then(|cfg| run(&cli.command, &cfg));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let text = match cli.global.format {
        Format::Text => outcome.text,
        Format::Json => {
            let wrapped = Envelope {
                command: command_name(&cli.command),
                version: env!("CARGO_PKG_VERSION"),
                result: outcome.json,
            };
            serde_json::to_string_pretty(&wrapped).expect("envelope serializes") + "\n"
        }
    };
    let mut out = std::io::stdout().lock();
    // A closed pipe is not worth an error message.
    let _ = out.write_all(text.as_bytes());
    if outcome.positive {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
