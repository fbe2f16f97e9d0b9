use std::process::ExitCode;

use clap::Parser;
use kerrslab::cli::{run, Cli};

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
