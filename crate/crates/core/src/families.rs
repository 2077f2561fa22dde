//! Closed-form solution families indexed by `(omega, n, s)`.
//!
//! *Exact* family (constant density and pressure):
//! `V = (rho0, n^-s cos(ny - omega t), omega/n, h0)`.
//!
//! *Approximate* family, with `X = nx - omega t`, `Y = ny - omega t`:
//! `U = (rho0, omega/n + n^-s cos Y, omega/n + n^-s cos X, h0 + n^-2s sin X sin Y)`.
//! It solves the gas system up to a defect `(0, 0, 0, R4)` in the `h`
//! equation, `R4 = n^(1-3s) cos X cos Y (sin X + sin Y)`.
//!
//! Time derivatives are hard-coded closed forms so identity checks carry no
//! finite-difference error.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::euler::{GasParams, Reference, State, StateVector};
use crate::spectral::{Field, TorusGrid};

/// Branch of a family: `omega = +1` or `omega = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Omega {
    Plus,
    Minus,
}

impl Omega {
    pub fn value(self) -> f64 {
        match self {
            Omega::Plus => 1.0,
            Omega::Minus => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Omega::Plus),
            -1 => Ok(Omega::Minus),
            other => Err(invalid(format!("omega must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub omega: Omega,
    pub n: u32,
    pub s: f64,
}

impl FamilyParams {
    pub fn new(omega: Omega, n: u32, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("family index n must be positive"));
        }
        if !(s > 2.0) {
            return Err(invalid(format!("regularity index s = {s} must exceed 2")));
        }
        Ok(Self { omega, n, s })
    }

    pub fn with_omega(self, omega: Omega) -> Self {
        Self { omega, ..self }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `n^-s`, the oscillation amplitude of the velocity.
    pub fn amplitude(&self) -> f64 {
        self.nf().powf(-self.s)
    }
}

fn require_resolved(grid: &TorusGrid, k: i64) -> Result<()> {
    let limit = grid.dealias_cutoff();
    if k > limit {
        return Err(LabError::UnrepresentableMode { kx: k, ky: k, n: grid.size(), limit });
    }
    Ok(())
}

fn base_reference(g: &GasParams) -> Reference {
    Reference { rho: g.rho0, h: g.h0 }
}

/// Exact constant-density solution at time `t`. Needs `n <= N/3`.
pub fn exact_solution(f: &FamilyParams, g: &GasParams, grid: &TorusGrid, t: f64) -> Result<State> {
    require_resolved(grid, f.n as i64)?;
    let (n, w, a) = (f.nf(), f.omega.value(), f.amplitude());
    let dev = StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| a * (n * y - w * t).cos()),
        Field::constant(grid, w / n),
        Field::zeros(grid),
    )?;
    Ok(State::from_deviation(base_reference(g), dev))
}

/// `d/dt` of [`exact_solution`].
pub fn exact_time_derivative(f: &FamilyParams, grid: &TorusGrid, t: f64) -> Result<StateVector> {
    require_resolved(grid, f.n as i64)?;
    let (n, w, a) = (f.nf(), f.omega.value(), f.amplitude());
    StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| w * a * (n * y - w * t).sin()),
        Field::zeros(grid),
        Field::zeros(grid),
    )
}

/// Approximate solution at time `t`. Needs `2n <= N/3`.
pub fn approx_solution(f: &FamilyParams, g: &GasParams, grid: &TorusGrid, t: f64) -> Result<State> {
    require_resolved(grid, 2 * f.n as i64)?;
    let (n, w, a) = (f.nf(), f.omega.value(), f.amplitude());
    let a2 = a * a;
    let dev = StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| w / n + a * (n * y - w * t).cos()),
        Field::from_fn(grid, |x, _| w / n + a * (n * x - w * t).cos()),
        Field::from_fn(grid, |x, y| a2 * (n * x - w * t).sin() * (n * y - w * t).sin()),
    )?;
    Ok(State::from_deviation(base_reference(g), dev))
}

/// `d/dt` of [`approx_solution`].
pub fn approx_time_derivative(f: &FamilyParams, grid: &TorusGrid, t: f64) -> Result<StateVector> {
    require_resolved(grid, 2 * f.n as i64)?;
    let (n, w, a) = (f.nf(), f.omega.value(), f.amplitude());
    let a2 = a * a;
    StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| w * a * (n * y - w * t).sin()),
        Field::from_fn(grid, |x, _| w * a * (n * x - w * t).sin()),
        Field::from_fn(grid, |x, y| -w * a2 * (n * x + n * y - 2.0 * w * t).sin()),
    )
}

/// Initial data shared by the approximate and the actual solution of branch `omega`.
pub fn initial_data(f: &FamilyParams, g: &GasParams, grid: &TorusGrid) -> Result<State> {
    require_resolved(grid, 2 * f.n as i64)?;
    let (n, w, a) = (f.nf(), f.omega.value(), f.amplitude());
    let a2 = a * a;
    let dev = StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| w / n + a * (n * y).cos()),
        Field::from_fn(grid, |x, _| w / n + a * (n * x).cos()),
        Field::from_fn(grid, |x, y| a2 * (n * x).sin() * (n * y).sin()),
    )?;
    Ok(State::from_deviation(base_reference(g), dev))
}

/// Defect `R4` of the approximate family, product form.
pub fn residue_field(f: &FamilyParams, grid: &TorusGrid, t: f64) -> Result<Field> {
    require_resolved(grid, 2 * f.n as i64)?;
    let (n, w) = (f.nf(), f.omega.value());
    let c = n.powf(1.0 - 3.0 * f.s);
    Ok(Field::from_fn(grid, |x, y| {
        let (sx, cx) = (n * x - w * t).sin_cos();
        let (sy, cy) = (n * y - w * t).sin_cos();
        c * cx * cy * (sx + sy)
    }))
}

/// Defect `R4`, product-to-sum form
/// `n^(1-3s)/2 (sin 2X cos Y + cos X sin 2Y)`.
pub fn residue_field_expanded(f: &FamilyParams, grid: &TorusGrid, t: f64) -> Result<Field> {
    require_resolved(grid, 2 * f.n as i64)?;
    let (n, w) = (f.nf(), f.omega.value());
    let c = 0.5 * n.powf(1.0 - 3.0 * f.s);
    Ok(Field::from_fn(grid, |x, y| {
        let ax = n * x - w * t;
        let ay = n * y - w * t;
        c * ((2.0 * ax).sin() * ay.cos() + ax.cos() * (2.0 * ay).sin())
    }))
}

/// Constant-free envelope `n^(2 sigma - 3s + 1)` bounding `||R4||_sigma`.
/// Needs `1 < sigma <= s - 1`, `s > 2`, `n >= 2`.
pub fn residue_norm_bound(f: &FamilyParams, sigma: f64) -> Result<f64> {
    if !(f.s > 2.0) {
        return Err(invalid(format!("s = {} must exceed 2", f.s)));
    }
    if !(sigma > 1.0 && sigma <= f.s - 1.0) {
        return Err(invalid(format!("sigma = {sigma} must lie in (1, s - 1 = {}]", f.s - 1.0)));
    }
    if f.n < 2 {
        return Err(invalid("residue envelope needs n >= 2"));
    }
    Ok(f.nf().powf(residue_bound_exponent(f.s, sigma)))
}

pub fn residue_bound_exponent(s: f64, sigma: f64) -> f64 {
    2.0 * sigma - 3.0 * s + 1.0
}

/// `U^{+1,n}(t) - U^{-1,n}(t)` in closed form:
/// `(0, 2/n + 2 n^-s sin ny sin t, 2/n + 2 n^-s sin nx sin t, -n^-2s sin(nx + ny) sin 2t)`.
pub fn approx_difference(n: u32, s: f64, grid: &TorusGrid, t: f64) -> Result<StateVector> {
    let f = FamilyParams::new(Omega::Plus, n, s)?;
    require_resolved(grid, 2 * n as i64)?;
    let nf = n as f64;
    let a = f.amplitude();
    let a2 = a * a;
    let st = t.sin();
    let s2t = (2.0 * t).sin();
    StateVector::new(
        Field::zeros(grid),
        Field::from_fn(grid, |_, y| 2.0 / nf + 2.0 * a * (nf * y).sin() * st),
        Field::from_fn(grid, |x, _| 2.0 / nf + 2.0 * a * (nf * x).sin() * st),
        Field::from_fn(grid, |x, y| -a2 * (nf * x + nf * y).sin() * s2t),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{divergence, rhs};
    use crate::spectral::sobolev_norm;
    use std::f64::consts::{PI, SQRT_2};

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn fam(omega: Omega, n: u32) -> FamilyParams {
        FamilyParams::new(omega, n, 3.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FamilyParams::new(Omega::Plus, 0, 3.0).is_err());
        assert!(FamilyParams::new(Omega::Plus, 4, 2.0).is_err());
        assert!(Omega::from_sign(0).is_err());
        assert_eq!(Omega::from_sign(-1).unwrap(), Omega::Minus);
    }

    #[test]
    fn exact_solution_sample_values() {
        let gr = grid(16);
        let g = GasParams::default();
        let s = exact_solution(&fam(Omega::Plus, 2), &g, &gr, 0.0).unwrap();
        let expected_u = Field::from_fn(&gr, |_, y| (2.0 * y).cos() / 8.0);
        assert!(s.u().sub(&expected_u).unwrap().max_abs() < 1e-16);
        assert!(s.v().samples().iter().all(|&v| v == 0.5));
        assert!(s.rho().samples().iter().all(|&r| r == 1.0));
        assert!(s.h().samples().iter().all(|&h| h == 1.0));
        assert!(divergence(&s).max_abs() < 1e-15);
    }

    #[test]
    fn aliasing_is_rejected() {
        let gr = grid(24);
        let g = GasParams::default();
        assert!(exact_solution(&fam(Omega::Plus, 9), &g, &gr, 0.0).is_err());
        assert!(exact_solution(&fam(Omega::Plus, 8), &g, &gr, 0.0).is_ok());
        assert!(approx_solution(&fam(Omega::Plus, 5), &g, &gr, 0.0).is_err());
        assert!(initial_data(&fam(Omega::Plus, 4), &g, &gr).is_ok());
        assert!(residue_field(&fam(Omega::Plus, 5), &gr, 0.0).is_err());
    }

    #[test]
    fn exact_difference_velocity_norm() {
        let gr = grid(48);
        let g = GasParams::default();
        let n = 5;
        let t = 0.7;
        let a = exact_solution(&fam(Omega::Plus, n), &g, &gr, t).unwrap();
        let b = exact_solution(&fam(Omega::Minus, n), &g, &gr, t).unwrap();
        let d = a.difference(&b).unwrap();
        let nf = n as f64;
        let expected_u = 2.0 * SQRT_2 * PI / nf.powi(3) * (1.0 + nf * nf).powf(1.5) * t.sin().abs();
        let got_u = sobolev_norm(&d.u, 3.0);
        assert!((got_u - expected_u).abs() < 1e-12 * expected_u);
        // v differs by the constant 2/n.
        assert!((sobolev_norm(&d.v, 3.0) - 2.0 * PI * 2.0 / nf).abs() < 1e-12);
    }

    #[test]
    fn approx_at_zero_matches_initial_data() {
        let gr = grid(32);
        let g = GasParams::default();
        for omega in [Omega::Plus, Omega::Minus] {
            let f = fam(omega, 4);
            let a = approx_solution(&f, &g, &gr, 0.0).unwrap();
            let i = initial_data(&f, &g, &gr).unwrap();
            assert!(a.difference(&i).unwrap().max_abs() < 1e-18);
            assert!(a.deviation().rho.max_abs() == 0.0);
        }
    }

    #[test]
    fn initial_data_properties() {
        let g = GasParams::default();
        for n in [1_u32, 2, 4, 8] {
            let gr = grid(8 * n as usize);
            let p = initial_data(&fam(Omega::Plus, n), &g, &gr).unwrap();
            let m = initial_data(&fam(Omega::Minus, n), &g, &gr).unwrap();
            let d0 = p.difference(&m).unwrap().sobolev_norm(3.0);
            let oracle = 4.0 * SQRT_2 * PI / n as f64;
            assert!((d0 - oracle).abs() < 1e-11 * oracle, "n={n}: {d0} vs {oracle}");
            let dev_h = p.deviation().h.max_abs();
            assert!(dev_h <= (n as f64).powi(-6) * (1.0 + 1e-12));
            if n >= 2 {
                assert!(p.min_rho() > 0.0 && p.min_h() > 0.0);
            } else {
                // h = 1 + sin x sin y touches zero at (pi/2, 3pi/2).
                assert!(p.min_h().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn residue_forms_agree() {
        let gr = grid(48);
        for omega in [Omega::Plus, Omega::Minus] {
            for t in [0.0, 0.4, 1.3] {
                let f = FamilyParams::new(omega, 3, 2.5).unwrap();
                let a = residue_field(&f, &gr, t).unwrap();
                let b = residue_field_expanded(&f, &gr, t).unwrap();
                let scale = (3.0_f64).powf(1.0 - 7.5);
                assert!(a.sub(&b).unwrap().max_abs() < 1e-14 * scale);
            }
        }
    }

    #[test]
    fn exact_family_residual_vanishes() {
        let g = GasParams::default();
        for omega in [Omega::Plus, Omega::Minus] {
            for n in [2_u32, 4] {
                let gr = grid(8 * n as usize);
                let f = fam(omega, n);
                for t in [0.0, 0.5] {
                    let s = exact_solution(&f, &g, &gr, t).unwrap();
                    let rate = rhs(&s, &g).unwrap();
                    let dt = exact_time_derivative(&f, &gr, t).unwrap();
                    let defect = dt.sub(&rate).unwrap().sobolev_norm(0.0);
                    assert!(defect < 1e-10, "omega={omega:?} n={n}: {defect}");
                }
            }
        }
    }

    #[test]
    fn residue_identity_holds() {
        let g = GasParams::default();
        let f = fam(Omega::Minus, 4);
        let gr = grid(32);
        let t = 0.3;
        let s = approx_solution(&f, &g, &gr, t).unwrap();
        let defect = approx_time_derivative(&f, &gr, t).unwrap().sub(&rhs(&s, &g).unwrap()).unwrap();
        let r4 = residue_field(&f, &gr, t).unwrap();
        let r4_norm = sobolev_norm(&r4, 0.0);
        assert!(sobolev_norm(&defect.rho, 0.0) < 1e-10 * r4_norm.max(1e-300) + 1e-18);
        assert!(sobolev_norm(&defect.u, 0.0) < 1e-16);
        assert!(sobolev_norm(&defect.v, 0.0) < 1e-16);
        let rel = sobolev_norm(&defect.h.sub(&r4).unwrap(), 0.0) / r4_norm;
        assert!(rel < 1e-10, "relative residue error {rel}");
    }

    #[test]
    fn residue_bound_cases() {
        let f = FamilyParams::new(Omega::Plus, 10, 3.0).unwrap();
        assert!((residue_norm_bound(&f, 1.5).unwrap() - 1e-5).abs() < 1e-18);
        assert!(residue_norm_bound(&f, 2.0).is_ok());
        assert!(residue_norm_bound(&f, 2.01).is_err());
        assert!(residue_norm_bound(&f, 1.0).is_err());
        let f1 = FamilyParams::new(Omega::Plus, 1, 3.0).unwrap();
        assert!(residue_norm_bound(&f1, 1.5).is_err());
        for s in [2.1, 3.0, 4.5] {
            for sigma in [1.01, 0.5 * (s), s - 1.0] {
                if sigma > 1.0 {
                    assert!(residue_bound_exponent(s, sigma) < 0.0);
                }
            }
        }
    }

    #[test]
    fn difference_closed_form_at_zero() {
        let gr = grid(32);
        let d = approx_difference(4, 3.0, &gr, 0.0).unwrap();
        assert!(d.rho.max_abs() == 0.0 && d.h.max_abs() == 0.0);
        assert!(d.u.samples().iter().all(|&v| (v - 0.5).abs() < 1e-16));
        assert!(d.v.samples().iter().all(|&v| (v - 0.5).abs() < 1e-16));
    }
}
