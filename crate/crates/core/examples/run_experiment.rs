//! Drives an experiment mode through the library API and prints where the
//! CSV and its JSON sidecar went.
//!
//! cargo run --release --example run_experiment [config-file]

use mfrelay::cli::{run, ExperimentConfig};

fn main() -> mfrelay::Result<()> {
    let mut cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_file(path.as_ref())?,
        None => ExperimentConfig::parse("mode = custom\ngamma_db = 0, 10, 20\nsamples = 50000\n")?,
    };
    let dir = std::env::temp_dir();
    cfg.out = Some(dir.join(format!("mfrelay-{}.csv", cfg.mode)));
    let report = run(&cfg)?;
    println!("config hash {}", cfg.hash());
    println!("csv: {}\nsidecar: {}\npassed: {}", report.csv.display(), report.sidecar.display(), report.passed);
    print!("{}", std::fs::read_to_string(&report.csv).unwrap_or_default());
    Ok(())
}
