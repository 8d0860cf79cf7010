mod app;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    ExitCode::from(app::run(argv))
}
