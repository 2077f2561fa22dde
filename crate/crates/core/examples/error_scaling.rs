//! Distance between the numerical solution and the approximate family at
//! `T = 1` as a function of `n`, with a refined control run at the largest `n`.
//! The default list is small so the example runs in seconds; pass a list such
//! as `8 16 32` for the full study.
//!
//! ```text
//! cargo run --release --example error_scaling [n ...]
//! ```

use toruslab::lab::{run_error_scaling, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ns: Vec<u32> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if ns.is_empty() {
        ns = vec![4, 6, 8, 12];
    }
    let cfg = ExperimentConfig { n_list: Some(ns), ..ExperimentConfig::for_experiment(ExperimentKind::ErrorScaling) };
    cfg.validate()?;
    let report = run_error_scaling(&cfg)?;
    for r in &report.rows {
        println!("n = {:3}  N = {:4}  steps = {:4}  ||E(T)||_1.5 = {:.6e}", r.n, r.grid_size, r.steps.unwrap_or(0), r.measured);
    }
    println!("fitted slope {:.3} (bound {:.2})", report.fitted_slope.unwrap_or(f64::NAN), cfg.beta());
    for note in &report.notes {
        println!("{note}");
    }
    println!("certified: {}, pass: {}", report.valid, report.pass());
    Ok(())
}
