use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dilab_cli::error::exit;
use dilab_cli::{run, Cli, SUMMARY_FILE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            // The summary is already on disk; a closed stdout (e.g. `| head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{}", outcome.report.render())
                .and_then(|()| writeln!(stdout, "summary: {}", outcome.out_dir.join(SUMMARY_FILE).display()));
            let code = if outcome.report.passed() {
                exit::OK
            } else {
                exit::CHECK_FAILED
            };
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("dilab {}: error: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
