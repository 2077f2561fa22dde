//! Two branches `omega = +1, -1` whose data approach each other as `n` grows
//! while the evolved solutions stay apart.
//!
//! ```text
//! cargo run --release --example nonuniform [n ...]
//! ```

use toruslab::lab::{run_nonuniform, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns: Vec<u32> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let mut cfg = ExperimentConfig::for_experiment(ExperimentKind::Nonuniform);
    if !ns.is_empty() {
        cfg.n_list = Some(ns);
    }
    cfg.validate()?;
    let report = run_nonuniform(&cfg)?;

    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "n", "d0", "d(T)", "approx d(T)", "err+ (H^1.5)");
    for n in cfg.n_list() {
        let last = report.final_row(n).expect("final row");
        println!("{n:>3} {:>12.6} {:>12.6} {:>12.6} {:>12.3e}", last.d0, last.d_final, last.approx_d, last.err_plus);
    }
    for c in &report.checks {
        println!("{} {} = {:.4e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value);
    }
    Ok(())
}
