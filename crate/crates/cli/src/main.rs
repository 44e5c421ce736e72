use clap::Parser;
use qpt_cli::app::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("qpt: {e}");
        std::process::exit(e.exit_code());
    }
}
