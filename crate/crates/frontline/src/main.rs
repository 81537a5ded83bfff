use std::process::ExitCode;

fn main() -> ExitCode {
    frontline::cli::run(std::env::args_os())
}
