use std::process::ExitCode;

use clap::Parser;
use quaternion_lg::cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let out = run(&config);
    if config.output.is_none() {
        println!("{}", out.report);
    }
    if let Some(msg) = &out.message {
        eprintln!("qlg: {msg}");
    }
    ExitCode::from(out.exit_code as u8)
}
