//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toruslab::euler::{matrix_a, matrix_a0, matrix_a1, matrix_b, matrix_b1, rhs, GasParams, PointState};
use toruslab::families::{approx_solution, approx_time_derivative, residue_field, FamilyParams, Omega};
use toruslab::lab::{
    run_error_scaling, run_exact_check, run_higher_norm, run_inequalities, run_nonuniform, run_residue_scaling,
    ExperimentConfig, ExperimentKind,
};
use toruslab::spectral::{sobolev_norm, synthesize, Mode, TorusGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn expect(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn norm_formula() -> Outcome {
    let grid = TorusGrid::new(128).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for n in 1..=16 {
        let f = synthesize(&grid, &[Mode::cos(0, n, 1.0)]).map_err(|e| e.to_string())?;
        for sigma in [0.0, 1.5, 3.0] {
            let closed = PI * SQRT_2 * (1.0 + (n * n) as f64).powf(sigma / 2.0);
            worst = worst.max((sobolev_norm(&f, sigma) - closed).abs() / closed);
        }
    }
    expect(worst <= 1e-9, format!("max rel error {worst:.2e}"))
}

fn symmetrizer() -> Outcome {
    let g = GasParams::default();
    let kappa = g.kappa();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut id_err, mut sym, mut spd, mut near, mut near_min) = (0.0_f64, true, true, 0, f64::INFINITY);
    for _ in 0..1000 {
        let p = PointState::new(
            rng.gen_range(0.5..=2.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(0.5..=2.0),
        );
        let e = |r: toruslab::Result<_>| r.map_err(|e: toruslab::LabError| e.to_string());
        let a0 = e(matrix_a0(&p, &g))?;
        let a1 = e(matrix_a1(&p, &g))?;
        let b1 = e(matrix_b1(&p, &g))?;
        id_err = id_err.max((a0 * e(matrix_a(&p, &g))?).max_abs_diff(&a1));
        id_err = id_err.max((a0 * e(matrix_b(&p, &g))?).max_abs_diff(&b1));
        sym &= a1.is_symmetric(1e-12) && b1.is_symmetric(1e-12);
        let eig = a0.symmetric_eigenvalues();
        spd &= a0.is_symmetric(0.0) && eig.iter().all(|&l| l > 0.0);
        let r = 0.1 * g.rho0.min(g.h0);
        if (p.rho - g.rho0).abs() <= r && (p.h - g.h0).abs() <= r {
            near += 1;
            near_min = near_min.min(eig.iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }
    // Points drawn directly around the base state.
    for _ in 0..1000 {
        let d = 0.1 * g.rho0.min(g.h0);
        let p = PointState::new(
            g.rho0 + rng.gen_range(-d..=d),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            g.h0 + rng.gen_range(-d..=d),
        );
        let eig = matrix_a0(&p, &g).map_err(|e| e.to_string())?.symmetric_eigenvalues();
        near += 1;
        near_min = near_min.min(eig.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    expect(
        id_err <= 1e-12 && sym && spd && near_min >= kappa,
        format!("identity err {id_err:.1e}, symmetric {sym}, SPD {spd}, min eig near base {near_min:.4} >= kappa {kappa} over {near} points"),
    )
}

fn residue_identity() -> Outcome {
    let g = GasParams::default();
    let mut worst = 0.0_f64;
    for omega in [Omega::Plus, Omega::Minus] {
        for n in [4u32, 8, 16] {
            let grid = TorusGrid::new(8 * n as usize).map_err(|e| e.to_string())?;
            let f = FamilyParams::new(omega, n, 3.0).map_err(|e| e.to_string())?;
            for t in [0.0, 0.3, 1.0] {
                // Rows with a zero target are measured against the size of
                // their time derivative (absolute if that vanishes too).
                let run = || -> toruslab::Result<f64> {
                    let dt = approx_time_derivative(&f, &grid, t)?;
                    let defect = dt.sub(&rhs(&approx_solution(&f, &g, &grid, t)?, &g)?)?;
                    let r4 = residue_field(&f, &grid, t)?;
                    let mut worst = sobolev_norm(&defect.h.sub(&r4)?, 0.0) / sobolev_norm(&r4, 0.0);
                    for (d, c) in [(&defect.rho, &dt.rho), (&defect.u, &dt.u), (&defect.v, &dt.v)] {
                        let scale = sobolev_norm(c, 0.0);
                        worst = worst.max(sobolev_norm(d, 0.0) / if scale > 0.0 { scale } else { 1.0 });
                    }
                    Ok(worst)
                };
                worst = worst.max(run().map_err(|e| e.to_string())?);
            }
        }
    }
    expect(worst <= 1e-10, format!("max componentwise rel L2 error {worst:.2e}"))
}

fn residue_scaling() -> Outcome {
    let r = run_residue_scaling(&ExperimentConfig::for_experiment(ExperimentKind::ResidueScaling)).map_err(|e| e.to_string())?;
    let slope = r.fitted_slope.unwrap_or(f64::NAN);
    let below = r.rows.iter().all(|row| row.measured <= row.envelope.unwrap_or(0.0) * (1.0 + 1e-12));
    expect((slope + 6.5).abs() <= 0.05 && below && r.pass(), format!("slope {slope:.4}, below envelope {below}"))
}

fn exact_family() -> Outcome {
    let cfg = ExperimentConfig { n_list: Some(vec![8]), ..ExperimentConfig::for_experiment(ExperimentKind::ExactCheck) };
    assert_eq!(cfg.grid_size(8), 64);
    let r = run_exact_check(&cfg).map_err(|e| e.to_string())?;
    let v = |name: &str| r.check(name).map(|c| c.value).unwrap_or(f64::NAN);
    let (dev, order, div) = (v("deviation[n=8]"), v("richardson_order[n=8]"), v("divergence[n=8]"));
    expect(dev <= 1e-8 && order >= 3.8 && div <= 1e-10, format!("deviation {dev:.2e}, order {order:.3}, divergence {div:.1e}"))
}

fn nonuniform() -> Outcome {
    let cfg = ExperimentConfig::for_experiment(ExperimentKind::Nonuniform);
    let start = Instant::now();
    let r = run_nonuniform(&cfg).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mut ok = r.pass() && secs <= 300.0;
    let mut d0_err = 0.0_f64;
    for n in cfg.n_list() {
        let first = r.rows_for(n).next().ok_or("missing rows")?;
        d0_err = d0_err.max((first.d0 - 4.0 * SQRT_2 * PI / n as f64).abs() / first.d0);
    }
    let d0: Vec<f64> = cfg.n_list().iter().map(|&n| r.rows_for(n).next().map(|x| x.d0).unwrap_or(f64::NAN)).collect();
    ok &= d0_err <= 1e-8 && d0.windows(2).all(|w| w[1] < w[0]);
    let mut floor = f64::INFINITY;
    for n in cfg.n_list().into_iter().filter(|&n| n >= 16) {
        let last = r.final_row(n).ok_or("missing final row")?;
        ok &= last.t == 1.0;
        floor = floor.min(last.d_final / last.approx_d);
    }
    ok &= floor >= 0.75;
    let triangle = r.rows.iter().all(|row| row.triangle_holds());
    ok &= triangle;
    expect(ok, format!("d0 rel err {d0_err:.1e}, min d(1)/approx_d(1) for n>=16 {floor:.6}, triangle {triangle}, {secs:.0} s"))
}

fn error_scaling() -> Outcome {
    let cfg = ExperimentConfig::for_experiment(ExperimentKind::ErrorScaling);
    let r = run_error_scaling(&cfg).map_err(|e| e.to_string())?;
    let slope = r.fitted_slope.unwrap_or(f64::NAN);
    let ctrl = r.check("control_rel_diff[n=32]").map(|c| c.value).unwrap_or(f64::NAN);
    expect(
        slope <= -2.4 && ctrl < 0.01 && r.valid && r.pass(),
        format!("slope {slope:.4} (report bound {:.2}), control rel diff {ctrl:.2e}", cfg.beta() + 0.1),
    )
}

fn higher_norm() -> Outcome {
    let cfg = ExperimentConfig::for_experiment(ExperimentKind::HigherNorm);
    let r = run_higher_norm(&cfg).map_err(|e| e.to_string())?;
    let slope = r.fitted_slope.unwrap_or(f64::NAN);
    expect(cfg.tau() == 4.0 && (slope - 1.0).abs() <= 0.15, format!("tau {}, slope {slope:.4}", cfg.tau()))
}

fn inequalities() -> Outcome {
    let cfg = ExperimentConfig::for_experiment(ExperimentKind::Inequalities);
    let r = run_inequalities(&cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for row in &r.rows {
        ok &= row.family_size == 500 && row.violations == 0 && row.equality_cases == row.probes;
        parts.push(format!("{} {:.1e}", row.check.name(), row.refinement_change()));
    }
    ok &= r.pass();
    expect(ok, format!("no violations, all equality probes exact, refinement change: {}", parts.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 norm formula", norm_formula),
        ("2 symmetrizer identities", symmetrizer),
        ("3 residue identity", residue_identity),
        ("4 residue scaling", residue_scaling),
        ("5 exact family propagation", exact_family),
        ("6 nonuniform dependence", nonuniform),
        ("7 error scaling", error_scaling),
        ("8 higher-norm bound", higher_norm),
        ("9 inequality suite", inequalities),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
