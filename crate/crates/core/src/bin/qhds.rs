use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qhds::cli::run(std::env::args_os()))
}
