use clap::Parser;

fn main() {
    let args = mfrelay::cli::Args::parse();
    std::process::exit(mfrelay::cli::main_with(&args));
}
