use clap::Parser;

fn main() {
    let cli = tripweaver_cli::Cli::parse();
    if let Err(e) = tripweaver_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
