use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = esb3_cli::Cli::parse();
    match esb3_cli::run(cli) {
        Ok(code) => {
            if code == 3 {
                eprintln!("warning: the fit did not converge; the result was written with converged=false");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
