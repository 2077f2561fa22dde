//! Runs any experiment from a JSON config and writes its CSV and
//! `summary.json`, the same way the `toruslab` binary does.
//!
//! ```text
//! cargo run --release --example run_experiment -- config.json out_dir
//! ```
//!
//! A minimal config: `{"experiment": "residue_scaling", "sigma": 2.0}`.

use std::path::PathBuf;

use toruslab::lab::{run, write_outputs, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_json(r#"{"experiment": "residue_scaling"}"#)?,
    };
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    let outcome = run(&cfg)?;
    let files = write_outputs(&cfg, &outcome, &dir)?;
    println!("{}: pass = {} ({})", cfg.experiment.name(), outcome.pass(), files.summary.display());
    std::process::exit(if outcome.pass() { 0 } else { 1 });
}
