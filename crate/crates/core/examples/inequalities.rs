//! Seeded sweeps of the commutator, reciprocal, algebra and interpolation
//! ratios on two grids. Prints the report CSV to stdout.
//!
//! ```text
//! cargo run --release --example inequalities [family_size] [seed]
//! ```

use toruslab::inequalities::{commutator_ratio, run_all, write_report, RandomFieldSpec, SweepConfig};
use toruslab::spectral::TorusGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let family_size = args.next().map(|a| a.parse()).transpose()?.unwrap_or(100);
    let seed = args.next().map(|a| a.parse()).transpose()?.unwrap_or(7);

    let grid = TorusGrid::new(64)?;
    let f = RandomFieldSpec { max_mode: 8, spectrum_decay: 2.0, seed }.sample(&grid)?;
    let u = RandomFieldSpec { max_mode: 8, spectrum_decay: 2.0, seed: seed + 1 }.sample(&grid)?;
    println!("# single pair: commutator ratio {:.6e}", commutator_ratio(&f, &u, 1.5, 3.0)?);

    let rows = run_all(&SweepConfig { family_size, seed, ..Default::default() })?;
    write_report(&rows, std::io::stdout().lock())?;
    Ok(())
}
