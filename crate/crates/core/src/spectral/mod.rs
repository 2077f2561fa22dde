//! Fourier calculus on the periodic square `[0, 2pi)^2`.
//!
//! Norms use the un-normalized Lebesgue measure of the torus, so the constant
//! field `1` has `L^2` norm `2pi` and `cos(n y)` has `H^s` norm
//! `pi sqrt(2) (1 + n^2)^(s/2)`.

mod export;
mod transform;

pub use export::{SpectralDump, SpectralMode, DEFAULT_DUMP_THRESHOLD};

use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{LabError, Result};
use transform::Plans;

/// Uniform `N x N` discretization of the 2-torus with period `2pi` per axis.
#[derive(Clone)]
pub struct TorusGrid {
    plans: Arc<Plans>,
    n: usize,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusGrid(N={})", self.n)
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LabError::InvalidGridSize(n));
        }
        Ok(Self { plans: cached_plans(n), n })
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coordinate(j)).collect()
    }

    /// Integer wavenumber held by DFT index `i` (standard layout, `-N/2+1..=N/2`).
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// DFT index of wavenumber `k`, if `k` is in the table.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k > n / 2 || k <= -n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Largest wavenumber kept by [`dealias`].
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Largest wavenumber accepted by [`synthesize`].
    pub fn max_synth_mode(&self) -> i64 {
        self.nyquist() - 1
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn cached_plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(Plans::new(n))).clone()
}

/// Normalized Fourier coefficients of a real field on the `kx >= 0` half plane.
#[derive(Clone, Debug)]
pub struct Spectrum {
    n: usize,
    data: Vec<Complex64>,
}

/// One stored coefficient with its half-plane multiplicity.
#[derive(Clone, Copy, Debug)]
pub struct SpectralEntry {
    pub kx: i64,
    pub ky: i64,
    pub coeff: Complex64,
    /// 2 when the conjugate partner `(-kx, -ky)` is not stored separately.
    pub multiplicity: f64,
}

impl Spectrum {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::default(); (n / 2 + 1) * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn ky_of(&self, iy: usize) -> i64 {
        let n = self.n as i64;
        let iy = iy as i64;
        if iy <= n / 2 {
            iy
        } else {
            iy - n
        }
    }

    /// Coefficient of `exp(i (kx x + ky y))`; zero when `(kx, ky)` is outside the table.
    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        let n = self.n as i64;
        let in_table = |k: i64| k <= n / 2 && k > -n / 2;
        if !in_table(kx) || !in_table(ky) {
            return Complex64::default();
        }
        if kx >= 0 {
            self.data[kx as usize * self.n + ky.rem_euclid(n) as usize]
        } else {
            // -ky may wrap onto the Nyquist row, which is its own partner.
            let ky_partner = (-ky).rem_euclid(n) as usize;
            self.data[(-kx) as usize * self.n + ky_partner].conj()
        }
    }

    /// Sets the coefficient of `(kx, ky)` and its conjugate partner `(-kx, -ky)`.
    pub fn set(&mut self, kx: i64, ky: i64, c: Complex64) -> Result<()> {
        let n = self.n as i64;
        let in_table = |k: i64| k <= n / 2 && k > -n / 2;
        if !in_table(kx) || !in_table(ky) {
            return Err(LabError::UnrepresentableMode { kx, ky, n: self.n, limit: n / 2 });
        }
        let (kx, ky, c) = if kx < 0 { (-kx, -ky, c.conj()) } else { (kx, ky, c) };
        self.data[kx as usize * self.n + ky.rem_euclid(n) as usize] = c;
        if kx == 0 || kx == n / 2 {
            self.data[kx as usize * self.n + (-ky).rem_euclid(n) as usize] = c.conj();
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = SpectralEntry> + '_ {
        let n = self.n;
        let nyq = n / 2;
        self.data.iter().enumerate().map(move |(idx, &coeff)| {
            let ix = idx / n;
            let iy = idx % n;
            let multiplicity = if ix == 0 || ix == nyq { 1.0 } else { 2.0 };
            SpectralEntry {
                kx: ix as i64,
                ky: self.ky_of(iy),
                coeff,
                multiplicity,
            }
        })
    }

    /// Scales each coefficient by `m(kx, ky)`, a real even multiplier.
    fn apply_real_multiplier(&mut self, m: impl Fn(i64, i64) -> f64) {
        let n = self.n;
        for ix in 0..=n / 2 {
            for iy in 0..n {
                let ky = self.ky_of(iy);
                self.data[ix * n + iy] *= m(ix as i64, ky);
            }
        }
    }

    /// Scales each coefficient by `i * d(kx, ky)` with `d` odd.
    fn apply_imag_multiplier(&mut self, d: impl Fn(i64, i64) -> f64) {
        let n = self.n;
        for ix in 0..=n / 2 {
            for iy in 0..n {
                let ky = self.ky_of(iy);
                let c = self.data[ix * n + iy];
                self.data[ix * n + iy] = Complex64::new(0.0, d(ix as i64, ky)) * c;
            }
        }
    }

    /// Restores exact conjugate symmetry on the self-paired `kx = 0` and
    /// `kx = N/2` columns.
    fn symmetrize(&mut self) {
        let n = self.n;
        for ix in [0, n / 2] {
            for iy in 0..=n / 2 {
                let partner = (n - iy) % n;
                let a = self.data[ix * n + iy];
                let b = self.data[ix * n + partner];
                let avg = 0.5 * (a + b.conj());
                self.data[ix * n + iy] = avg;
                self.data[ix * n + partner] = avg.conj();
            }
        }
    }

    fn combine(&self, a: f64, other: &Spectrum, b: f64) -> Spectrum {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Spectrum { n: self.n, data }
    }
}

/// A real scalar field on a [`TorusGrid`], with lazily cached spectrum.
#[derive(Clone)]
pub struct Field {
    grid: TorusGrid,
    samples: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl Field {
    pub fn from_samples(grid: &TorusGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(LabError::SampleCount {
                got: samples.len(),
                expected: grid.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite("samples".into()));
        }
        Ok(Self::from_samples_unchecked(grid, samples))
    }

    fn from_samples_unchecked(grid: &TorusGrid, samples: Vec<f64>) -> Self {
        Self {
            grid: grid.clone(),
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.coordinates();
        let mut samples = Vec::with_capacity(grid.len());
        for &y in &xs {
            for &x in &xs {
                samples.push(f(x, y));
            }
        }
        Self::from_samples_unchecked(grid, samples)
    }

    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        let mut spec = Spectrum::zeros(grid.size());
        spec.data[0] = Complex64::new(value, 0.0);
        let field = Self::from_samples_unchecked(grid, vec![value; grid.len()]);
        let _ = field.spectrum.set(spec);
        field
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Builds the field from normalized coefficients. The kx = 0 and kx = N/2
    /// columns are symmetrized so the field is real.
    pub fn from_spectrum(grid: &TorusGrid, mut spectrum: Spectrum) -> Result<Self> {
        if spectrum.n != grid.size() {
            return Err(LabError::GridMismatch {
                left: spectrum.n,
                right: grid.size(),
            });
        }
        spectrum.symmetrize();
        let samples = grid.plans.inverse(&spectrum.data);
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite("spectrum".into()));
        }
        let field = Self::from_samples_unchecked(grid, samples);
        let _ = field.spectrum.set(spectrum);
        Ok(field)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Sample at node `(ix, iy)`, i.e. at `(2pi ix/N, 2pi iy/N)`.
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.samples[iy * self.grid.n + ix]
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| Spectrum {
                n: self.grid.n,
                data: self.grid.plans.forward(&self.samples),
            })
    }

    pub fn coefficient(&self, kx: i64, ky: i64) -> Complex64 {
        self.spectrum().get(kx, ky)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.spectrum().data[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Self::from_samples_unchecked(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_samples_unchecked(&self.grid, samples))
    }

    /// `a * self + b * other`. Cached spectra are combined instead of recomputed.
    pub fn linear_combination(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        let out = self.zip_with(other, |x, y| a * x + b * y)?;
        if let (Some(s), Some(o)) = (self.spectrum.get(), other.spectrum.get()) {
            let _ = out.spectrum.set(s.combine(a, o, b));
        }
        Ok(out)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        let out = self.map(|v| a * v);
        if let Some(s) = self.spectrum.get() {
            let _ = out.spectrum.set(s.combine(a, s, 0.0));
        }
        out
    }

    pub fn add_constant(&self, c: f64) -> Field {
        let out = self.map(|v| v + c);
        if let Some(s) = self.spectrum.get() {
            let mut spec = s.clone();
            spec.data[0] += c;
            let _ = out.spectrum.set(spec);
        }
        out
    }

    /// Pointwise product on the grid (aliased; see [`dealias`] and [`product_refined`]).
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    fn with_spectrum_op(&self, op: impl FnOnce(&mut Spectrum)) -> Field {
        let mut spec = self.spectrum().clone();
        op(&mut spec);
        let samples = self.grid.plans.inverse(&spec.data);
        let out = Self::from_samples_unchecked(&self.grid, samples);
        let _ = out.spectrum.set(spec);
        out
    }

    /// Spectral interpolation onto another grid: zero-padding when refining,
    /// truncation when coarsening. Nyquist modes of either grid are dropped.
    pub fn resample(&self, target: &TorusGrid) -> Field {
        if *target == self.grid {
            return self.clone();
        }
        let limit = self.grid.nyquist().min(target.nyquist()) - 1;
        let src = self.spectrum();
        let mut spec = Spectrum::zeros(target.n);
        let n_t = target.n;
        for ix in 0..=limit as usize {
            for ky in -limit..=limit {
                let iy = ky.rem_euclid(n_t as i64) as usize;
                spec.data[ix * n_t + iy] = src.get(ix as i64, ky);
            }
        }
        Field::from_spectrum(target, spec).expect("grid sizes match")
    }

    /// Translation by whole grid cells: `g(x, y) = f(x - dx h, y - dy h)`.
    pub fn shifted(&self, dx: usize, dy: usize) -> Field {
        let n = self.grid.n;
        let mut samples = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                samples[((iy + dy) % n) * n + (ix + dx) % n] = self.samples[iy * n + ix];
            }
        }
        Self::from_samples_unchecked(&self.grid, samples)
    }

    /// Physical-space `L^2` norm by the trapezoidal rule (spectrally exact for
    /// band-limited fields).
    pub fn l2_norm_quadrature(&self) -> f64 {
        let cell = self.grid.spacing() * self.grid.spacing();
        (self.samples.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }
}

/// Kind of a trigonometric mode in [`synthesize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Cos,
    Sin,
}

/// `amplitude * cos|sin(kx x + ky y + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mode {
    pub kx: i64,
    pub ky: i64,
    pub amplitude: f64,
    pub kind: ModeKind,
    pub phase: f64,
}

impl Mode {
    pub fn cos(kx: i64, ky: i64, amplitude: f64) -> Self {
        Self { kx, ky, amplitude, kind: ModeKind::Cos, phase: 0.0 }
    }

    pub fn sin(kx: i64, ky: i64, amplitude: f64) -> Self {
        Self { kx, ky, amplitude, kind: ModeKind::Sin, phase: 0.0 }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let arg = self.kx as f64 * x + self.ky as f64 * y + self.phase;
        match self.kind {
            ModeKind::Cos => self.amplitude * arg.cos(),
            ModeKind::Sin => self.amplitude * arg.sin(),
        }
    }
}

/// Samples a trigonometric polynomial pointwise. Modes must satisfy
/// `|kx|, |ky| <= N/2 - 1`.
pub fn synthesize(grid: &TorusGrid, modes: &[Mode]) -> Result<Field> {
    let limit = grid.max_synth_mode();
    if let Some(m) = modes.iter().find(|m| m.kx.abs() > limit || m.ky.abs() > limit) {
        return Err(LabError::UnrepresentableMode {
            kx: m.kx,
            ky: m.ky,
            n: grid.size(),
            limit,
        });
    }
    if modes.iter().any(|m| !m.amplitude.is_finite() || !m.phase.is_finite()) {
        return Err(LabError::NonFinite("mode list".into()));
    }
    Ok(Field::from_fn(grid, |x, y| modes.iter().map(|m| m.eval(x, y)).sum()))
}

pub fn partial_x(f: &Field) -> Field {
    let nyq = f.grid.nyquist();
    f.with_spectrum_op(|s| {
        s.apply_imag_multiplier(|kx, ky| {
            if kx == nyq || ky == nyq {
                0.0
            } else {
                kx as f64
            }
        })
    })
}

pub fn partial_y(f: &Field) -> Field {
    let nyq = f.grid.nyquist();
    f.with_spectrum_op(|s| {
        s.apply_imag_multiplier(|kx, ky| {
            if kx == nyq || ky == nyq {
                0.0
            } else {
                ky as f64
            }
        })
    })
}

/// `(partial_x f, partial_y f)`.
pub fn gradient(f: &Field) -> (Field, Field) {
    (partial_x(f), partial_y(f))
}

fn bessel_weight(kx: i64, ky: i64) -> f64 {
    1.0 + (kx * kx + ky * ky) as f64
}

/// `Lambda^sigma = (1 - Laplacian)^(sigma/2)` as the multiplier `(1 + |k|^2)^(sigma/2)`.
pub fn lambda_pow(f: &Field, sigma: f64) -> Field {
    f.with_spectrum_op(|s| s.apply_real_multiplier(|kx, ky| bessel_weight(kx, ky).powf(0.5 * sigma)))
}

/// `H^sigma(T^2)` norm by Parseval with the `2pi`-periodic measure.
pub fn sobolev_norm(f: &Field, sigma: f64) -> f64 {
    sobolev_norm_sq(f, sigma).sqrt()
}

pub(crate) fn sobolev_norm_sq(f: &Field, sigma: f64) -> f64 {
    let measure = 4.0 * PI * PI;
    let sum: f64 = f
        .spectrum()
        .entries()
        .filter(|e| e.coeff != Complex64::default())
        .map(|e| {
            let w = if sigma == 0.0 {
                1.0
            } else {
                bessel_weight(e.kx, e.ky).powf(sigma)
            };
            e.multiplicity * w * e.coeff.norm_sqr()
        })
        .fold(0.0, |a, b| a + b);
    measure * sum
}

/// Applies a real multiplier `m(kx, ky)`, which must be even in `k`.
pub fn apply_multiplier(f: &Field, m: impl Fn(i64, i64) -> f64) -> Field {
    f.with_spectrum_op(|s| s.apply_real_multiplier(m))
}

/// 2/3-rule truncation: zeroes every mode with `max(|kx|, |ky|) > floor(N/3)`.
pub fn dealias(f: &Field) -> Field {
    let cut = f.grid.dealias_cutoff();
    f.with_spectrum_op(|s| {
        s.apply_real_multiplier(|kx, ky| if kx.abs().max(ky.abs()) > cut { 0.0 } else { 1.0 })
    })
}

/// Pointwise product evaluated on a grid of twice the resolution and truncated
/// back to `f`'s grid. Exact whenever the product's modes stay below `N/2`.
pub fn product_refined(f: &Field, g: &Field) -> Result<Field> {
    f.check_grid(g)?;
    let fine = TorusGrid::new(2 * f.grid.n)?;
    let prod = f.resample(&fine).mul(&g.resample(&fine))?;
    Ok(prod.resample(&f.grid))
}
