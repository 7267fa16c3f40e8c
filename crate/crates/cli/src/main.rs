use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tsncalc_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TSNCALC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.report)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(outcome.report.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
