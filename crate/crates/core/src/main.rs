use clap::Parser;

fn main() {
    std::process::exit(blowuplab::cli::run(blowuplab::cli::Cli::parse()));
}
