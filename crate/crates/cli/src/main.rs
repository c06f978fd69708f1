use std::process::ExitCode;

use clap::Parser;

use fraccalc_cli::config::{Cli, RunConfig};
use fraccalc_cli::error::{CliError, CliResult};

fn init_threads() -> CliResult<()> {
    let n = match std::env::var("FRACCALC_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::invalid(format!("FRACCALC_THREADS must be a count, got '{v}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: {line}");
            return ExitCode::from(2);
        }
    };
    let (kind, flags) = cli.command.split();
    let outcome =
        init_threads().and_then(|_| RunConfig::resolve(kind, flags)).and_then(|cfg| fraccalc_cli::commands::run(&cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
