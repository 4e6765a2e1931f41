use std::process::ExitCode;

fn main() -> ExitCode {
    specsense::cli::main_with_args(std::env::args_os())
}
