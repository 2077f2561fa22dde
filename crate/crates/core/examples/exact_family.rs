//! Evolves an exact shear-wave solution with RK4 and compares it with the
//! closed form. Writes the norm trajectory as CSV.
//!
//! ```text
//! cargo run --release --example exact_family [out.csv]
//! ```

use std::fs::File;
use std::io::BufWriter;

use toruslab::euler::{divergence, GasParams};
use toruslab::families::{exact_solution, FamilyParams, Omega};
use toruslab::solver::{evolve, SolveConfig};
use toruslab::spectral::TorusGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "exact_family.csv".into());
    let g = GasParams::default();
    let grid = TorusGrid::new(64)?;
    let f = FamilyParams::new(Omega::Plus, 8, 3.0)?;
    let s0 = exact_solution(&f, &g, &grid, 0.0)?;

    let mut previous = None;
    for cfl in [0.25, 0.125, 0.0625] {
        let cfg = SolveConfig { cfl, keep_states: true, record_stride: 1, ..Default::default() };
        let traj = evolve(&s0, &g, &cfg)?;
        let mut dev = 0.0_f64;
        let mut div = 0.0_f64;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            dev = dev.max(s.difference(&exact_solution(&f, &g, &grid, *t)?)?.sobolev_norm(3.0));
            div = div.max(divergence(s).max_abs());
        }
        let order = previous.map(|p: f64| (p / dev).log2());
        println!("cfl {cfl:6}: {:4} steps, max H^3 deviation {dev:.3e}, order {:?}, max |div| {div:.1e}", traj.steps, order);
        previous = Some(dev);
        if cfl == 0.25 {
            traj.write_csv(BufWriter::new(File::create(&out)?))?;
        }
    }
    println!("trajectory written to {out}");
    Ok(())
}
