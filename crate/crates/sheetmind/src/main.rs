use clap::Parser;
use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_env("SHEETMIND_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .init();
    let cli = sheetmind::cli::Cli::parse();
    std::process::exit(sheetmind::cli::run(cli));
}
