//! Pointwise coefficient matrices of the gas system in `(rho, u, v, h)` variables.
//!
//! The system reads `U_t + A(U) U_x + B(U) U_y = 0`. `A0` symmetrizes it:
//! `A1 = A0 A` and `B1 = A0 B` are symmetric and `A0` is positive definite
//! whenever `rho > 0` and `h > 0`.

use std::fmt;
use std::ops::{Index, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Ratio of specific heats and the base state `(rho0, 0, 0, h0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GasParams {
    pub gamma: f64,
    pub rho0: f64,
    pub h0: f64,
}

impl Default for GasParams {
    fn default() -> Self {
        Self { gamma: 1.4, rho0: 1.0, h0: 1.0 }
    }
}

impl GasParams {
    pub fn new(gamma: f64, rho0: f64, h0: f64) -> Result<Self> {
        let p = Self { gamma, rho0, h0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma < 3.0) {
            return Err(invalid(format!("gamma = {} must lie in (1, 3)", self.gamma)));
        }
        if !(self.rho0 > 0.0 && self.h0 > 0.0) {
            return Err(invalid(format!(
                "base state needs rho0 > 0 and h0 > 0 (got {}, {})",
                self.rho0, self.h0
            )));
        }
        Ok(())
    }

    /// Lower bound for the smallest eigenvalue of `A0` near the base state.
    pub fn kappa(&self) -> f64 {
        self.rho0
            .min(self.h0 / (2.0 * self.rho0))
            .min(self.rho0 / (2.0 * (self.gamma - 1.0) * self.h0))
    }

    pub fn base_point(&self) -> PointState {
        PointState { rho: self.rho0, u: 0.0, v: 0.0, h: self.h0 }
    }
}

/// Pointwise value of `U = (rho, u, v, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub h: f64,
}

impl PointState {
    pub fn new(rho: f64, u: f64, v: f64, h: f64) -> Self {
        Self { rho, u, v, h }
    }

    pub fn check_in_domain(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(LabError::OutsideStateSpace { field: "rho", min: self.rho });
        }
        if !(self.h > 0.0) {
            return Err(LabError::OutsideStateSpace { field: "h", min: self.h });
        }
        Ok(())
    }
}

/// First derivatives of `(rho, u, v, h)` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointGradient {
    pub rho_x: f64,
    pub rho_y: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub h_x: f64,
    pub h_y: f64,
}

/// Dense real 4x4 matrix, row-major.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct CoeffMatrix(pub [[f64; 4]; 4]);

impl fmt::Debug for CoeffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CoeffMatrix[")?;
        for row in &self.0 {
            writeln!(f, "  {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}", row[0], row[1], row[2], row[3])?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CoeffMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl Mul for CoeffMatrix {
    type Output = CoeffMatrix;

    fn mul(self, rhs: CoeffMatrix) -> CoeffMatrix {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        CoeffMatrix(out)
    }
}

impl CoeffMatrix {
    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, v) in d.into_iter().enumerate() {
            m[i][i] = v;
        }
        CoeffMatrix(m)
    }

    pub fn row(&self, i: usize) -> [f64; 4] {
        self.0[i]
    }

    pub fn diag(&self) -> [f64; 4] {
        [self.0[0][0], self.0[1][1], self.0[2][2], self.0[3][3]]
    }

    pub fn transpose(&self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out[j][i] = v;
            }
        }
        CoeffMatrix(out)
    }

    pub fn max_abs_diff(&self, other: &CoeffMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.transpose()) <= tol
    }

    pub fn apply(&self, x: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Determinants of the leading `k x k` blocks, `k = 1..=4`.
    pub fn leading_minors(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            *o = determinant(&self.0, k + 1);
        }
        out
    }

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
    pub fn symmetric_eigenvalues(&self) -> [f64; 4] {
        let mut a = self.0;
        for _sweep in 0..50 {
            let off: f64 = (0..4)
                .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..3 {
                for q in p + 1..4 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
        ev.sort_by(f64::total_cmp);
        ev
    }
}

fn determinant(m: &[[f64; 4]; 4], k: usize) -> f64 {
    let mut a = [[0.0; 4]; 4];
    for i in 0..k {
        a[i][..k].copy_from_slice(&m[i][..k]);
    }
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..k {
            let factor = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= factor * a[col][c];
            }
        }
    }
    det
}

pub fn matrix_a(p: &PointState, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    let PointState { rho, u, h, .. } = *p;
    Ok(CoeffMatrix([
        [u, rho, 0.0, 0.0],
        [h / rho, u, 0.0, 1.0],
        [0.0, 0.0, u, 0.0],
        [0.0, (g.gamma - 1.0) * h, 0.0, u],
    ]))
}

pub fn matrix_b(p: &PointState, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    let PointState { rho, v, h, .. } = *p;
    Ok(CoeffMatrix([
        [v, 0.0, rho, 0.0],
        [0.0, v, 0.0, 0.0],
        [h / rho, 0.0, v, 1.0],
        [0.0, 0.0, (g.gamma - 1.0) * h, v],
    ]))
}

/// The symmetrizer `diag(h/rho, rho, rho, rho/((gamma-1)h))`.
pub fn matrix_a0(p: &PointState, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    let PointState { rho, h, .. } = *p;
    Ok(CoeffMatrix::diagonal([h / rho, rho, rho, rho / ((g.gamma - 1.0) * h)]))
}

pub fn matrix_a1(p: &PointState, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    let PointState { rho, u, h, .. } = *p;
    Ok(CoeffMatrix([
        [u * h / rho, h, 0.0, 0.0],
        [h, rho * u, 0.0, rho],
        [0.0, 0.0, rho * u, 0.0],
        [0.0, rho, 0.0, rho * u / ((g.gamma - 1.0) * h)],
    ]))
}

pub fn matrix_b1(p: &PointState, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    let PointState { rho, v, h, .. } = *p;
    Ok(CoeffMatrix([
        [v * h / rho, 0.0, h, 0.0],
        [0.0, rho * v, 0.0, 0.0],
        [h, 0.0, rho * v, rho],
        [0.0, 0.0, rho, rho * v / ((g.gamma - 1.0) * h)],
    ]))
}

/// Zeroth-order coupling matrix of the error system between an actual
/// solution (value `p`, gradient `d`) and an approximate one whose
/// `h`-component equals `h_approx` at the same point.
pub fn matrix_c(p: &PointState, d: &PointGradient, h_approx: f64, g: &GasParams) -> Result<CoeffMatrix> {
    p.check_in_domain()?;
    if !(h_approx > 0.0) {
        return Err(LabError::OutsideStateSpace { field: "h_approx", min: h_approx });
    }
    let rho = p.rho;
    let div = d.u_x + d.v_y;
    let m = CoeffMatrix([
        [div, d.rho_x, d.rho_y, 0.0],
        [-h_approx * d.rho_x / (rho * g.rho0), d.u_x, d.u_y, d.rho_x / rho],
        [-h_approx * d.rho_y / (rho * g.rho0), d.v_x, d.v_y, d.rho_y / rho],
        [0.0, d.h_x, d.h_y, (g.gamma - 1.0) * div],
    ]);
    if !m.is_finite() {
        return Err(LabError::NonFinite("matrix C".into()));
    }
    Ok(m)
}
