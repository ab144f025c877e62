mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    let report = run(cli.command);
    let text = if pretty {
        serde_json::to_string_pretty(&report.to_json())
    } else {
        serde_json::to_string(&report.to_json())
    }
    .expect("reports serialize");
    println!("{text}");
    ExitCode::from(report.status.exit_code())
}
