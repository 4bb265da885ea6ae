use std::process::ExitCode;

use clap::Parser;

use iforge_cli::error::CliError;
use iforge_cli::output::write_output;
use iforge_cli::{resolve, run, Cli};

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("IFORGE_THREADS") else { return Ok(()) };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("IFORGE_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main_inner(cli: &Cli) -> Result<Option<String>, CliError> {
    configure_threads()?;
    let resolved = resolve(&cli.global)?;
    let output = run(cli, &resolved)?;
    write_output(&output.body, resolved.out.as_deref())?;
    Ok(output.failure)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("iforge: {}", CliError::Physics(failure));
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("iforge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
