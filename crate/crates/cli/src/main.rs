use clap::Parser;

fn main() {
    let cli = pretrends_cli::Cli::parse();
    if let Err(e) = pretrends_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(pretrends_cli::exit_code(&e));
    }
}
