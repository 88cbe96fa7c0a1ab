use std::process::ExitCode;

use clap::Parser;
use initdata::cli::{mkinit, MkinitArgs};

#[derive(Parser)]
#[command(name = "mkinit", about = "Write bump initial data as a grid snapshot")]
struct Cli {
    #[command(flatten)]
    args: MkinitArgs,
}

fn main() -> ExitCode {
    match mkinit(&Cli::parse().args) {
        Ok(h) => {
            println!("{}", serde_json::to_string_pretty(&h).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
