use std::process::ExitCode;

fn main() -> ExitCode {
    oodkit::cli::main_with_args(std::env::args_os())
}
