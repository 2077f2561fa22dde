//! Coefficient matrices of the gas system at a point, the symmetrizer `A0`
//! and its eigenvalue floor near the base state.
//!
//! ```text
//! cargo run --release --example symmetrizer
//! ```

use toruslab::euler::{matrix_a, matrix_a0, matrix_a1, matrix_b, matrix_b1, GasParams, PointState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = GasParams::default();
    let p = PointState::new(1.3, 0.4, -0.2, 0.8);

    let a0 = matrix_a0(&p, &g)?;
    let a1 = matrix_a1(&p, &g)?;
    let b1 = matrix_b1(&p, &g)?;
    println!("A0 = diag {:?}", a0.diag());
    println!("|A0 A - A1|_max = {:.2e}", (a0 * matrix_a(&p, &g)?).max_abs_diff(&a1));
    println!("|A0 B - B1|_max = {:.2e}", (a0 * matrix_b(&p, &g)?).max_abs_diff(&b1));
    println!("A1 symmetric: {}, B1 symmetric: {}", a1.is_symmetric(1e-14), b1.is_symmetric(1e-14));
    println!("leading minors of A0: {:?}", a0.leading_minors());

    let kappa = g.kappa();
    for d in [0.0, 0.05, 0.1] {
        let q = PointState::new(g.rho0 + d, d, -d, g.h0 - d);
        let eig = matrix_a0(&q, &g)?.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("offset {d:4}: min eig(A0) = {min:.4} (kappa = {kappa})");
    }
    Ok(())
}
