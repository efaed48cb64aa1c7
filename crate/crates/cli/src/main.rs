use clap::Parser;
use nlmc_cli::{args, run};

fn main() {
    // clap exits with code 2 on usage errors, matching CliError::Usage.
    let cli = args::Cli::parse();
    if let Err(err) = run::run(cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
