use std::process::ExitCode;

fn main() -> ExitCode {
    slicesum::cli::main_with_args(std::env::args_os())
}
