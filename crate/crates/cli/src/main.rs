use std::io::Write;
use std::process::ExitCode;

use asc_cli::commands::{frontend, kws_decide, score, simulate};
use asc_cli::CliError;
use clap::{Parser, Subcommand};

/// Robot microphone-array toolkit: scene simulation, classical front-end,
/// keyword decisions and challenge scoring.
#[derive(Debug, Parser)]
#[command(name = "asc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render labeled six-channel scenes.
    Simulate(simulate::SimulateArgs),
    /// AEC, SRP-PHAT localization and beamforming for every manifest entry.
    Frontend(frontend::FrontendArgs),
    /// Smooth and threshold posterior files into binary labels.
    KwsDecide(kws_decide::KwsDecideArgs),
    /// Score a label file against ground truth.
    Score(score::ScoreArgs),
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("summary serializes")
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Simulate(a) => simulate::run(&a).map(|s| to_json(&s)),
        Command::Frontend(a) => frontend::run(&a).map(|s| to_json(&s)),
        Command::KwsDecide(a) => kws_decide::run(&a).map(|s| to_json(&s)),
        Command::Score(a) => score::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::config(e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(out) => {
            // A closed pipe downstream is not a failure of the command.
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
