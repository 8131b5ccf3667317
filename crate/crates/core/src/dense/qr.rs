//! Householder QR, unpivoted and with column pivoting.

use super::{DenseMatrix, Permutation};
use crate::error::{Error, Result};

/// `A(:, perm) = Q R` with `Q` orthonormal (`m x k`) and `R` upper
/// trapezoidal (`k x n`).
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub perm: Permutation,
}

impl QrFactors {
    /// `|| A(:, perm) - Q R ||_F`
    pub fn residual(&self, a: &DenseMatrix) -> Result<f64> {
        let ap = self.perm.apply_cols(a)?;
        let qr = super::blas::matmul(&self.q, &self.r)?;
        ap.distance(&qr)
    }
}

/// Householder vectors stored below the diagonal of `buf`, LAPACK style.
struct Reflectors {
    m: usize,
    n: usize,
    buf: Vec<f64>,
    taus: Vec<f64>,
}

/// Generates a reflector `H = I - tau v v^T` with `v[0] = 1` such that
/// `H x = beta e1`. On return `x[0] = beta` and `x[1..]` holds `v[1..]`.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let xnorm = super::matrix::frobenius(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.signum() * alpha.hypot(xnorm);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    x[0] = beta;
    tau
}

/// Applies `I - tau v v^T` to `c`, where `v = [1, tail...]`.
#[inline]
fn apply_reflector(tail: &[f64], tau: f64, c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (c0, crest) = c.split_first_mut().expect("non-empty column");
    let w = *c0 + tail.iter().zip(crest.iter()).map(|(v, x)| v * x).sum::<f64>();
    let tw = tau * w;
    *c0 -= tw;
    for (x, v) in crest.iter_mut().zip(tail) {
        *x -= tw * v;
    }
}

impl Reflectors {
    fn steps(&self) -> usize {
        self.taus.len()
    }

    /// Applies reflector `j` to column `c` (rows `j..m`).
    fn apply_to_column(&mut self, j: usize, c: usize) {
        let m = self.m;
        let (left, right) = self.buf.split_at_mut(c * m);
        let tail = &left[j * m + j + 1..(j + 1) * m];
        apply_reflector(tail, self.taus[j], &mut right[j..m]);
    }

    fn r(&self) -> DenseMatrix {
        let k = self.steps();
        DenseMatrix::from_fn(k, self.n, |i, j| {
            if i <= j {
                self.buf[i + j * self.m]
            } else {
                0.0
            }
        })
    }

    /// Thin `Q` (`m x k`) by backward accumulation.
    fn q(&self) -> DenseMatrix {
        let (m, k) = (self.m, self.steps());
        let mut q = DenseMatrix::zeros(m, k);
        for i in 0..k {
            q[(i, i)] = 1.0;
        }
        for j in (0..k).rev() {
            let tail = &self.buf[j * m + j + 1..(j + 1) * m];
            for c in j..k {
                apply_reflector(tail, self.taus[j], &mut q.col_mut(c)[j..m]);
            }
        }
        q
    }
}

fn householder(a: &DenseMatrix) -> Reflectors {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut h = Reflectors {
        m,
        n,
        buf: a.as_slice().to_vec(),
        taus: Vec::with_capacity(k),
    };
    for j in 0..k {
        let tau = make_reflector(&mut h.buf[j * m + j..(j + 1) * m]);
        h.taus.push(tau);
        for c in (j + 1)..n {
            h.apply_to_column(j, c);
        }
    }
    h
}

/// Unpivoted Householder QR; `perm` is the identity.
pub fn qr_unpivoted(a: &DenseMatrix) -> QrFactors {
    let h = householder(a);
    QrFactors {
        q: h.q(),
        r: h.r(),
        perm: Permutation::identity(a.cols()),
    }
}

fn check_rank(a: &DenseMatrix, k: Option<usize>) -> Result<usize> {
    let kmax = a.rows().min(a.cols());
    let k = k.unwrap_or(kmax);
    if k > kmax || (k == 0 && kmax > 0) {
        return Err(Error::contract(format!(
            "cpqr rank {k} outside 1..={kmax} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(k)
}

fn cpqr_reflectors(a: &DenseMatrix, k: usize) -> (Reflectors, Permutation) {
    let (m, n) = a.shape();
    let mut h = Reflectors {
        m,
        n,
        buf: a.as_slice().to_vec(),
        taus: Vec::with_capacity(k),
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|c| a.col(c).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut norms_ref = norms.clone();
    let tol = f64::EPSILON.sqrt();

    for j in 0..k {
        let mut p = j;
        for c in (j + 1)..n {
            if norms[c] > norms[p] {
                p = c;
            }
        }
        if p != j {
            let (lo, hi) = h.buf.split_at_mut(p * m);
            lo[j * m..(j + 1) * m].swap_with_slice(&mut hi[..m]);
            perm.swap(j, p);
            norms.swap(j, p);
            norms_ref.swap(j, p);
        }
        let tau = make_reflector(&mut h.buf[j * m + j..(j + 1) * m]);
        h.taus.push(tau);
        for c in (j + 1)..n {
            h.apply_to_column(j, c);
            if norms[c] != 0.0 {
                let ratio = h.buf[j + c * m].abs() / norms[c];
                let shrink = (1.0 - ratio * ratio).max(0.0);
                let rel = norms[c] / norms_ref[c];
                if shrink * rel * rel <= tol {
                    // downdating lost half the digits; recompute from scratch
                    let fresh = super::matrix::frobenius(&h.buf[c * m + j + 1..(c + 1) * m]);
                    norms[c] = fresh;
                    norms_ref[c] = fresh;
                } else {
                    norms[c] *= shrink.sqrt();
                }
            }
        }
    }
    let perm = Permutation::from_vec(perm).expect("swaps preserve bijection");
    (h, perm)
}

/// Column-pivoted Householder QR halted after `k` steps (default
/// `min(m, n)`): `A(:, perm) = Q_k R_k`.
///
/// Each step picks the residual column of largest norm, lowest index on
/// ties. Residual norms are downdated and recomputed when cancellation
/// has eaten half the digits.
pub fn cpqr(a: &DenseMatrix, k: Option<usize>) -> Result<QrFactors> {
    let k = check_rank(a, k)?;
    let (h, perm) = cpqr_reflectors(a, k);
    Ok(QrFactors {
        q: h.q(),
        r: h.r(),
        perm,
    })
}

/// [`cpqr`] without forming `Q`; returns `(R, perm)`.
pub fn cpqr_r(a: &DenseMatrix, k: Option<usize>) -> Result<(DenseMatrix, Permutation)> {
    let k = check_rank(a, k)?;
    let (h, perm) = cpqr_reflectors(a, k);
    Ok((h.r(), perm))
}
