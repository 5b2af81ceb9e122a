use std::process::ExitCode;

fn main() -> ExitCode {
    heatsparse::cli::main_with_args(std::env::args_os())
}
