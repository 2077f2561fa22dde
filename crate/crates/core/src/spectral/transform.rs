//! Real 2D FFT on an `N x N` periodic grid.
//!
//! Physical samples are stored row-major with `x` fastest (`samples[iy * N + ix]`).
//! Spectra keep only the non-negative `kx` half plane (`kx = 0..=N/2`) and are
//! laid out with `ky` fastest (`data[ix * N + iy]`), normalized so that
//! `f(x, y) = sum_k c_k exp(i k.x)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plans {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Plans {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plans").field("n", &self.n).finish()
    }
}

impl Plans {
    pub(crate) fn new(n: usize) -> Self {
        let mut real = RealFftPlanner::<f64>::new();
        let mut complex = FftPlanner::<f64>::new();
        Self {
            n,
            r2c: real.plan_fft_forward(n),
            c2r: real.plan_fft_inverse(n),
            col_forward: complex.plan_fft_forward(n),
            col_inverse: complex.plan_fft_inverse(n),
        }
    }

    fn half(&self) -> usize {
        self.n / 2 + 1
    }

    /// Physical samples to normalized half-plane coefficients.
    pub(crate) fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let m = self.half();
        let mut rows = samples.to_vec();
        let mut rows_hat = vec![Complex64::default(); n * m];
        let mut scratch = self.r2c.make_scratch_vec();
        for (row, out) in rows.chunks_exact_mut(n).zip(rows_hat.chunks_exact_mut(m)) {
            self.r2c
                .process_with_scratch(row, out, &mut scratch)
                .expect("buffer sizes match the plan");
        }

        let mut cols = vec![Complex64::default(); n * m];
        for iy in 0..n {
            for ix in 0..m {
                cols[ix * n + iy] = rows_hat[iy * m + ix];
            }
        }
        let mut scratch = vec![Complex64::default(); self.col_forward.get_inplace_scratch_len()];
        self.col_forward.process_with_scratch(&mut cols, &mut scratch);

        let norm = 1.0 / (n * n) as f64;
        for c in &mut cols {
            *c *= norm;
        }
        cols
    }

    /// Normalized half-plane coefficients back to physical samples.
    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let m = self.half();
        let mut cols = coeffs.to_vec();
        let mut scratch = vec![Complex64::default(); self.col_inverse.get_inplace_scratch_len()];
        self.col_inverse.process_with_scratch(&mut cols, &mut scratch);

        let mut rows_hat = vec![Complex64::default(); n * m];
        for ix in 0..m {
            for iy in 0..n {
                rows_hat[iy * m + ix] = cols[ix * n + iy];
            }
        }

        let mut samples = vec![0.0; n * n];
        let mut scratch = self.c2r.make_scratch_vec();
        for (row_hat, out) in rows_hat.chunks_exact_mut(m).zip(samples.chunks_exact_mut(n)) {
            // The kx = 0 and kx = N/2 bins of a real row are real.
            row_hat[0].im = 0.0;
            row_hat[m - 1].im = 0.0;
            self.c2r
                .process_with_scratch(row_hat, out, &mut scratch)
                .expect("buffer sizes match the plan");
        }
        samples
    }
}
