use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(refprice::cli::run(std::env::args_os()) as u8)
}
