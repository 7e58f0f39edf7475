use std::io::BufRead;
use std::process::ExitCode;

use clap::Parser;

use seqfluct::cli::{self, Cli, CliCommand};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // stats without --seq reads sequences from stdin, one per line
    let stdin_lines = match &cli.command {
        CliCommand::Stats { seq: None } => std::io::stdin()
            .lock()
            .lines()
            .map_while(std::result::Result::ok)
            .filter(|line| !line.trim().is_empty())
            .collect(),
        _ => Vec::new(),
    };
    let outcome = cli::build(cli, stdin_lines).and_then(|config| cli::run(&config));
    match outcome {
        Ok(output) => {
            print!("{}", output.summary);
            if let Some(path) = &output.csv_path {
                eprintln!("wrote {}", path.display());
            }
            if let Some(path) = &output.json_path {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let record = serde_json::json!({
                "error": err.kind(),
                "message": err.to_string(),
                "exit_code": err.exit_code(),
            });
            eprintln!("{record}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
