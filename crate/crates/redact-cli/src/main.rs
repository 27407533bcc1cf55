use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(redact_cli::run_command(std::env::args_os()))
}
