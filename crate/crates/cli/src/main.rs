mod args;
mod boxspec;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use output::{emit, CliError, RunManifest};

fn execute(cli: &Cli, argv: &[String]) -> Result<u8, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", cli.jobs)))?;
    let outcome = pool.install(|| commands::run(&cli.command, cli.format, cli.seed))?;
    let out = cli.out.as_deref();
    emit(out, &outcome.data)?;
    RunManifest::new(commands::command_name(&cli.command), argv, cli, cli.seed).write(out)?;
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match execute(&cli, &argv[1..]) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
