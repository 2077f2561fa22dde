//! Growth of the `H^tau` norm of the approximate-family data and its
//! evolution, `tau = floor(s) + 1`.
//!
//! ```text
//! cargo run --release --example higher_norm
//! ```

use toruslab::lab::{run_higher_norm, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::for_experiment(ExperimentKind::HigherNorm);
    let report = run_higher_norm(&cfg)?;
    for r in &report.rows {
        println!("n = {:2}: max_t ||U~||_{} = {:.6}", r.n, cfg.tau(), r.measured);
    }
    println!("slope {:.4} vs predicted {}", report.fitted_slope.unwrap_or(f64::NAN), cfg.tau() - cfg.s);
    Ok(())
}
