//! The classical-form gas system
//!
//! ```text
//! rho_t + u rho_x + v rho_y + rho (u_x + v_y)            = 0
//! u_t   + u u_x + v u_y + h_x + (h / rho) rho_x          = 0
//! v_t   + u v_x + v v_y + h_y + (h / rho) rho_y          = 0
//! h_t   + u h_x + v h_y + (gamma - 1) h (u_x + v_y)      = 0
//! ```
//!
//! with `h = p / rho`, discretized pseudospectrally on the torus.
//!
//! A [`State`] stores `rho` and `h` as deviations from a constant reference
//! `(rho_ref, h_ref)`. The deviations of the families studied here are many
//! orders of magnitude below the reference values, and keeping them separate
//! preserves their relative precision through FFTs and time stepping.

mod matrices;

pub use matrices::{
    matrix_a, matrix_a0, matrix_a1, matrix_b, matrix_b1, matrix_c, CoeffMatrix, GasParams,
    PointGradient, PointState,
};

use crate::error::{LabError, Result};
use crate::spectral::{dealias, partial_x, partial_y, sobolev_norm_sq, Field, TorusGrid};

/// Minimum admissible `rho` and `h` when checking membership in the state space.
pub const DEFAULT_DOMAIN_FLOOR: f64 = 1e-8;

/// Four fields `(rho, u, v, h)` on one grid, with vector-space operations.
///
/// Used for deviations from a reference, time derivatives and differences of
/// states.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub rho: Field,
    pub u: Field,
    pub v: Field,
    pub h: Field,
}

pub const COMPONENT_NAMES: [&str; 4] = ["rho", "u", "v", "h"];

impl StateVector {
    pub fn new(rho: Field, u: Field, v: Field, h: Field) -> Result<Self> {
        let n = rho.grid().size();
        for f in [&u, &v, &h] {
            if f.grid().size() != n {
                return Err(LabError::GridMismatch { left: n, right: f.grid().size() });
            }
        }
        Ok(Self { rho, u, v, h })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        let z = Field::zeros(grid);
        Self { rho: z.clone(), u: z.clone(), v: z.clone(), h: z }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho.grid()
    }

    pub fn components(&self) -> [&Field; 4] {
        [&self.rho, &self.u, &self.v, &self.h]
    }

    fn map_pairs(&self, other: &StateVector, f: impl Fn(&Field, &Field) -> Result<Field>) -> Result<Self> {
        Ok(Self {
            rho: f(&self.rho, &other.rho)?,
            u: f(&self.u, &other.u)?,
            v: f(&self.v, &other.v)?,
            h: f(&self.h, &other.h)?,
        })
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> Self {
        Self { rho: f(&self.rho), u: f(&self.u), v: f(&self.v), h: f(&self.h) }
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &StateVector, b: f64) -> Result<Self> {
        self.map_pairs(other, |x, y| x.linear_combination(a, y, b))
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|f| f.scale(a))
    }

    /// `H^sigma` norm of each component.
    pub fn component_norms(&self, sigma: f64) -> [f64; 4] {
        self.components().map(|f| sobolev_norm_sq(f, sigma).sqrt())
    }

    /// Euclidean combination of the component `H^sigma` norms.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        self.components().iter().map(|f| sobolev_norm_sq(f, sigma)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|f| f.is_finite())
    }
}

/// Constant reference `(rho_ref, h_ref)` that a [`State`] stores `rho` and `h` against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub rho: f64,
    pub h: f64,
}

/// The unknown `U = (rho, u, v, h)` on the torus.
#[derive(Clone, Debug)]
pub struct State {
    reference: Reference,
    deviation: StateVector,
}

impl State {
    /// `rho = reference.rho + deviation.rho`, `h = reference.h + deviation.h`;
    /// `u` and `v` are taken as is.
    pub fn from_deviation(reference: Reference, deviation: StateVector) -> Self {
        Self { reference, deviation }
    }

    /// Builds a state from total fields, referencing `rho` and `h` to their means.
    pub fn from_totals(rho: Field, u: Field, v: Field, h: Field) -> Result<Self> {
        let reference = Reference { rho: rho.mean(), h: h.mean() };
        let deviation = StateVector::new(
            rho.add_constant(-reference.rho),
            u,
            v,
            h.add_constant(-reference.h),
        )?;
        Ok(Self { reference, deviation })
    }

    pub fn constant(grid: &TorusGrid, p: PointState) -> Self {
        let zero = Field::zeros(grid);
        Self {
            reference: Reference { rho: p.rho, h: p.h },
            deviation: StateVector {
                rho: zero.clone(),
                u: Field::constant(grid, p.u),
                v: Field::constant(grid, p.v),
                h: zero,
            },
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.deviation.grid()
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn deviation(&self) -> &StateVector {
        &self.deviation
    }

    pub fn rho(&self) -> Field {
        self.deviation.rho.add_constant(self.reference.rho)
    }

    pub fn u(&self) -> &Field {
        &self.deviation.u
    }

    pub fn v(&self) -> &Field {
        &self.deviation.v
    }

    pub fn h(&self) -> Field {
        self.deviation.h.add_constant(self.reference.h)
    }

    pub fn min_rho(&self) -> f64 {
        self.reference.rho + self.deviation.rho.min()
    }

    pub fn min_h(&self) -> f64 {
        self.reference.h + self.deviation.h.min()
    }

    pub fn point(&self, ix: usize, iy: usize) -> PointState {
        let d = &self.deviation;
        PointState {
            rho: self.reference.rho + d.rho.at(ix, iy),
            u: d.u.at(ix, iy),
            v: d.v.at(ix, iy),
            h: self.reference.h + d.h.at(ix, iy),
        }
    }

    /// Errors unless `min rho > floor` and `min h > floor`.
    pub fn check_in_domain(&self, floor: f64) -> Result<()> {
        if !self.deviation.is_finite() {
            let name = COMPONENT_NAMES
                .iter()
                .zip(self.deviation.components())
                .find(|(_, f)| !f.is_finite())
                .map(|(n, _)| *n)
                .unwrap_or("state");
            return Err(LabError::NonFinite(name.to_string()));
        }
        let min_rho = self.min_rho();
        if !(min_rho > floor) {
            return Err(LabError::OutsideStateSpace { field: "rho", min: min_rho });
        }
        let min_h = self.min_h();
        if !(min_h > floor) {
            return Err(LabError::OutsideStateSpace { field: "h", min: min_h });
        }
        Ok(())
    }

    /// `U - (rho0, 0, 0, h0)`.
    pub fn tilde(&self, rho0: f64, h0: f64) -> StateVector {
        let d = &self.deviation;
        StateVector {
            rho: d.rho.add_constant(self.reference.rho - rho0),
            u: d.u.clone(),
            v: d.v.clone(),
            h: d.h.add_constant(self.reference.h - h0),
        }
    }

    /// `self - other`, componentwise.
    pub fn difference(&self, other: &State) -> Result<StateVector> {
        let raw = self.deviation.sub(&other.deviation)?;
        Ok(StateVector {
            rho: raw.rho.add_constant(self.reference.rho - other.reference.rho),
            h: raw.h.add_constant(self.reference.h - other.reference.h),
            ..raw
        })
    }

    /// `self + dt * rate`, keeping the reference.
    pub fn advanced(&self, dt: f64, rate: &StateVector) -> Result<State> {
        Ok(State {
            reference: self.reference,
            deviation: self.deviation.linear_combination(1.0, rate, dt)?,
        })
    }

    pub fn map_deviation(&self, f: impl Fn(&Field) -> Field) -> State {
        State { reference: self.reference, deviation: self.deviation.map(f) }
    }
}

/// Options for [`rhs_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsOptions {
    pub dealias: bool,
    pub domain_floor: f64,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self { dealias: true, domain_floor: DEFAULT_DOMAIN_FLOOR }
    }
}

/// `-(A(U) U_x + B(U) U_y)` with dealiased products.
pub fn rhs(s: &State, g: &GasParams) -> Result<StateVector> {
    rhs_with(s, g, RhsOptions::default())
}

pub fn rhs_with(s: &State, g: &GasParams, opts: RhsOptions) -> Result<StateVector> {
    s.check_in_domain(opts.domain_floor)?;
    let grid = s.grid();
    let d = &s.deviation;
    let (rho_x, rho_y) = (partial_x(&d.rho), partial_y(&d.rho));
    let (u_x, u_y) = (partial_x(&d.u), partial_y(&d.u));
    let (v_x, v_y) = (partial_x(&d.v), partial_y(&d.v));
    let (h_x, h_y) = (partial_x(&d.h), partial_y(&d.h));

    let len = grid.len();
    let mut d_rho = Vec::with_capacity(len);
    let mut d_u = Vec::with_capacity(len);
    let mut d_v = Vec::with_capacity(len);
    let mut d_h = Vec::with_capacity(len);
    let gm1 = g.gamma - 1.0;
    let (r_ref, h_ref) = (s.reference.rho, s.reference.h);
    for i in 0..len {
        let rho = r_ref + d.rho.samples()[i];
        let h = h_ref + d.h.samples()[i];
        let u = d.u.samples()[i];
        let v = d.v.samples()[i];
        let (rx, ry) = (rho_x.samples()[i], rho_y.samples()[i]);
        let (ux, uy) = (u_x.samples()[i], u_y.samples()[i]);
        let (vx, vy) = (v_x.samples()[i], v_y.samples()[i]);
        let (hx, hy) = (h_x.samples()[i], h_y.samples()[i]);
        let div = ux + vy;
        let h_over_rho = h / rho;
        d_rho.push(-(u * rx + v * ry + rho * div));
        d_u.push(-(u * ux + v * uy + hx + h_over_rho * rx));
        d_v.push(-(u * vx + v * vy + hy + h_over_rho * ry));
        d_h.push(-(u * hx + v * hy + gm1 * h * div));
    }

    let mut out = StateVector::new(
        Field::from_samples(grid, d_rho)?,
        Field::from_samples(grid, d_u)?,
        Field::from_samples(grid, d_v)?,
        Field::from_samples(grid, d_h)?,
    )?;
    if opts.dealias {
        out = out.map(dealias);
    }
    Ok(out)
}

/// `u_x + v_y`.
pub fn divergence(s: &State) -> Field {
    partial_x(s.u())
        .add(&partial_y(s.v()))
        .expect("state components share one grid")
}

/// `max(|u| + c, |v| + c)` over the grid with `c = sqrt(gamma h)`.
pub fn max_wave_speed(s: &State, g: &GasParams) -> f64 {
    let d = &s.deviation;
    let h_ref = s.reference.h;
    let mut best = 0.0_f64;
    for i in 0..s.grid().len() {
        let c = (g.gamma * (h_ref + d.h.samples()[i]).max(0.0)).sqrt();
        let speed = d.u.samples()[i].abs().max(d.v.samples()[i].abs()) + c;
        best = best.max(speed);
    }
    best
}

/// `integral of W^T A0(U) W` over the torus (trapezoidal rule), the energy
/// that the symmetrizer makes equivalent to `||W||_{L^2}^2`.
pub fn symmetrizer_energy(s: &State, w: &StateVector, g: &GasParams) -> Result<f64> {
    let grid = s.grid();
    let cell = grid.spacing() * grid.spacing();
    let mut total = 0.0;
    for iy in 0..grid.size() {
        for ix in 0..grid.size() {
            let a0 = matrix_a0(&s.point(ix, iy), g)?;
            let x = w.components().map(|f| f.at(ix, iy));
            let ax = a0.apply(x);
            total += x.iter().zip(ax).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(total * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize, Mode};

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = GasParams::default();
        let s = State::constant(&grid(16), PointState::new(1.3, 0.4, -0.7, 0.9));
        let r = rhs(&s, &g).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_states_outside_domain() {
        let gr = grid(16);
        let g = GasParams::default();
        let rho = Field::from_fn(&gr, |x, _| 0.5 + x.cos());
        let one = Field::constant(&gr, 1.0);
        let zero = Field::zeros(&gr);
        let s = State::from_totals(rho, zero.clone(), zero, one).unwrap();
        assert!(matches!(
            rhs(&s, &g),
            Err(LabError::OutsideStateSpace { field: "rho", .. })
        ));
    }

    #[test]
    fn divergence_cases() {
        let gr = grid(32);
        let s = State::constant(&gr, PointState::new(1.0, 0.3, 0.2, 1.0));
        assert!(divergence(&s).max_abs() < 1e-15);

        let u = Field::from_fn(&gr, |x, _| x.sin());
        let dev = StateVector::new(Field::zeros(&gr), u, Field::zeros(&gr), Field::zeros(&gr)).unwrap();
        let s = State::from_deviation(Reference { rho: 1.0, h: 1.0 }, dev);
        let expected = Field::from_fn(&gr, |x, _| x.cos());
        assert!(divergence(&s).sub(&expected).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn wave_speed_cases() {
        let gr = grid(8);
        let g = GasParams::default();
        let s = State::constant(&gr, PointState::new(1.0, 0.0, 0.0, 1.0));
        assert!((max_wave_speed(&s, &g) - 1.4_f64.sqrt()).abs() < 1e-15);

        let g_near_one = GasParams { gamma: 1.0 + 1e-12, ..g };
        let s = State::constant(&gr, PointState::new(1.0, 2.0, 0.0, 1.0));
        assert!((max_wave_speed(&s, &g_near_one) - 3.0).abs() < 1e-11);

        let s1 = State::constant(&gr, PointState::new(1.0, 0.0, 0.0, 1.0));
        let s2 = State::constant(&gr, PointState::new(1.0, 0.0, 0.0, 2.0));
        let ratio = max_wave_speed(&s2, &g) / max_wave_speed(&s1, &g);
        assert!((ratio - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn linear_acoustics_is_consistent() {
        // Small sound wave: rho = 1 + eps cos x; rhs_u = -(h/rho) rho_x = eps sin x at leading order.
        let gr = grid(16);
        let g = GasParams::default();
        let eps = 1e-6;
        let dev = StateVector::new(
            synthesize(&gr, &[Mode::cos(1, 0, eps)]).unwrap(),
            Field::zeros(&gr),
            Field::zeros(&gr),
            Field::zeros(&gr),
        )
        .unwrap();
        let s = State::from_deviation(Reference { rho: 1.0, h: 1.0 }, dev);
        let r = rhs(&s, &g).unwrap();
        let expected = Field::from_fn(&gr, |x, _| eps * x.sin());
        assert!(r.u.sub(&expected).unwrap().max_abs() < 2.0 * eps * eps);
        assert!(r.rho.max_abs() < 1e-20);
    }

    #[test]
    fn difference_and_tilde_account_for_references() {
        let gr = grid(8);
        let a = State::constant(&gr, PointState::new(2.0, 1.0, 0.0, 3.0));
        let b = State::constant(&gr, PointState::new(1.5, 0.0, 0.5, 1.0));
        let d = a.difference(&b).unwrap();
        assert!((d.rho.mean() - 0.5).abs() < 1e-15);
        assert!((d.u.mean() - 1.0).abs() < 1e-15);
        assert!((d.v.mean() + 0.5).abs() < 1e-15);
        assert!((d.h.mean() - 2.0).abs() < 1e-15);
        let t = a.tilde(1.0, 1.0);
        assert!((t.rho.mean() - 1.0).abs() < 1e-15 && (t.h.mean() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn symmetrizer_energy_of_constant_perturbation() {
        let gr = grid(8);
        let g = GasParams::default();
        let s = State::constant(&gr, PointState::new(1.0, 0.0, 0.0, 1.0));
        let one = Field::constant(&gr, 1.0);
        let w = StateVector::new(one.clone(), one.clone(), one.clone(), one).unwrap();
        // diag(1, 1, 1, 2.5) summed, times the torus area.
        let area = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let e = symmetrizer_energy(&s, &w, &g).unwrap();
        assert!((e - 5.5 * area).abs() < 1e-12);
    }
}
