use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AHP_LOG_LEVEL", "warn")).init();
    let cli = ahp_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match ahp_cli::run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
