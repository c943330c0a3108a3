use clap::Parser;
use curemix_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = curemix_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
