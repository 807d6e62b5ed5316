use std::process::ExitCode;

use clap::Parser;
use kelpsim_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            for l in &e.output {
                println!("{l}");
            }
            eprintln!("kelpsim: {e}");
            ExitCode::from(e.code)
        }
    }
}
