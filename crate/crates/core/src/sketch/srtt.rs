//! Subsampled randomized trigonometric transform.
//!
//! `Omega = c * Pi_n * T * Phi * S` where `Pi_n` permutes the `n` input
//! coordinates, `T` is the orthonormal DCT-II, `Phi` flips signs and `S`
//! keeps `ell` of the `n` transformed coordinates. Applying it to an
//! `m x n` matrix costs `O(m n log n)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SrttOperator {
    pub(crate) n: usize,
    pub(crate) input_perm: Vec<usize>,
    pub(crate) signs: Vec<f64>,
    pub(crate) selected: Vec<usize>,
    pub(crate) scale: f64,
}

impl SrttOperator {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.selected.len()
    }

    /// `A * Omega` for `A` with `n` columns.
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.n {
            return Err(Error::dims(
                "srtt apply",
                format!("operator has {} rows, A has {} cols", self.n, a.cols()),
            ));
        }
        let m = a.rows();
        let ell = self.cols();
        let mut out = DenseMatrix::zeros(m, ell);
        if m == 0 || self.n == 0 {
            return Ok(out);
        }
        // rows of A become contiguous columns of A^T
        let at = a.transpose();
        let dct = Dct2::new(self.n);
        let mut row = vec![0.0; self.n];
        let mut spectrum = vec![0.0; self.n];
        for i in 0..m {
            let src = at.col(i);
            for (r, &p) in row.iter_mut().zip(&self.input_perm) {
                *r = src[p];
            }
            dct.forward(&row, &mut spectrum);
            for (c, &s) in self.selected.iter().enumerate() {
                out[(i, c)] = self.scale * self.signs[s] * spectrum[s];
            }
        }
        Ok(out)
    }
}

/// Orthonormal DCT-II through a length-`n` complex FFT (Makhoul's
/// even/odd reordering).
pub(crate) struct Dct2 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
    buf: std::cell::RefCell<Vec<Complex64>>,
}

impl Dct2 {
    pub(crate) fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let norm0 = (1.0 / n as f64).sqrt();
        let norm = (2.0 / n as f64).sqrt();
        let twiddle = (0..n)
            .map(|k| {
                let w = Complex64::from_polar(1.0, -PI * k as f64 / (2.0 * n as f64));
                w * if k == 0 { norm0 } else { norm }
            })
            .collect();
        Dct2 {
            n,
            fft,
            twiddle,
            buf: std::cell::RefCell::new(vec![Complex64::new(0.0, 0.0); n]),
        }
    }

    pub(crate) fn forward(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut buf = self.buf.borrow_mut();
        let half = n.div_ceil(2);
        for k in 0..half {
            buf[k] = Complex64::new(x[2 * k], 0.0);
        }
        for k in 0..n / 2 {
            buf[n - 1 - k] = Complex64::new(x[2 * k + 1], 0.0);
        }
        self.fft.process(&mut buf);
        for ((o, v), w) in out.iter_mut().zip(buf.iter()).zip(&self.twiddle) {
            *o = (v * w).re;
        }
    }
}
