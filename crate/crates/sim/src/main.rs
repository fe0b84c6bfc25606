use std::process::ExitCode;

fn main() -> ExitCode {
    pinch_sim::cli::run(std::env::args_os())
}
