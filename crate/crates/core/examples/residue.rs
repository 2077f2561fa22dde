//! The approximate family fails the equations only in the `h` row. This
//! example assembles `dU/dt + A U_x + B U_y` spectrally, compares it with the
//! closed-form residue and prints the residue norm scaling in `n`.
//!
//! ```text
//! cargo run --release --example residue
//! ```

use toruslab::euler::rhs;
use toruslab::families::{approx_solution, approx_time_derivative, residue_field, FamilyParams, Omega};
use toruslab::lab::{run_residue_scaling, ExperimentConfig, ExperimentKind};
use toruslab::spectral::{sobolev_norm, TorusGrid};
use toruslab::euler::GasParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = GasParams::default();
    for n in [4, 8, 16] {
        let grid = TorusGrid::new(8 * n as usize)?;
        let f = FamilyParams::new(Omega::Plus, n, 3.0)?;
        let t = 0.3;
        let defect = approx_time_derivative(&f, &grid, t)?.sub(&rhs(&approx_solution(&f, &g, &grid, t)?, &g)?)?;
        let r4 = residue_field(&f, &grid, t)?;
        let rel = sobolev_norm(&defect.h.sub(&r4)?, 0.0) / sobolev_norm(&r4, 0.0);
        let others = [&defect.rho, &defect.u, &defect.v].map(|c| c.max_abs());
        println!("n = {n:2}: h-row rel. error {rel:.2e}, other rows max {:.2e}", others.iter().cloned().fold(0.0, f64::max));
    }

    let report = run_residue_scaling(&ExperimentConfig::for_experiment(ExperimentKind::ResidueScaling))?;
    for r in &report.rows {
        println!("n = {:2}: ||R4||_1.5 = {:.6e}  envelope {:.6e}", r.n, r.measured, r.envelope.unwrap_or(f64::NAN));
    }
    println!("fitted slope {:.4}, pass = {}", report.fitted_slope.unwrap_or(f64::NAN), report.pass());
    Ok(())
}
