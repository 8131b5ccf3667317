//! Reference SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Used as an accuracy oracle, not on any hot path. Tall inputs are first
//! reduced with an unpivoted QR so the rotations act on a square factor.

use super::blas::matmul;
use super::qr::qr_unpivoted;
use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// `A = U diag(sigma) V^T` with `sigma` non-increasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        super::blas::gemm(&us, super::blas::Op::NoTrans, &self.v, super::blas::Op::Trans)
            .expect("factor shapes agree")
    }
}

/// `(sum_{j >= k} sigma_j^2)^{1/2}`, the optimal rank-`k` Frobenius error.
pub fn svd_tail_norm(sigma: &[f64], k: usize) -> f64 {
    assert!(k <= sigma.len(), "tail index {k} beyond {} values", sigma.len());
    super::matrix::frobenius(&sigma[k..])
}

/// Orthogonalizes the columns of `w` in place; returns the column norms.
/// With `v` given, the same rotations are accumulated into it.
fn jacobi_sweeps(w: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) -> Result<Vec<f64>> {
    let n = w.cols();
    let eps = f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let cp = w.col(p);
                    let cq = w.col(q);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut g = 0.0;
                    for (x, y) in cp.iter().zip(cq) {
                        a += x * x;
                        b += y * y;
                        g += x * y;
                    }
                    (a, b, g)
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, p, q, c, s);
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "one-sided Jacobi did not converge within {MAX_SWEEPS} sweeps"
        )));
    }
    Ok((0..n).map(|j| super::matrix::frobenius(w.col(j))).collect())
}

fn rotate(w: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let m = w.rows();
    let data = w.as_mut_slice();
    let (lo, hi) = data.split_at_mut(q * m);
    let cp = &mut lo[p * m..(p + 1) * m];
    let cq = &mut hi[..m];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

fn sorted_order(norms: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let t;
    let a = if a.rows() < a.cols() {
        t = a.transpose();
        &t
    } else {
        a
    };
    let mut w = if a.rows() > a.cols() {
        qr_unpivoted(a).r
    } else {
        a.clone()
    };
    let norms = jacobi_sweeps(&mut w, None)?;
    Ok(sorted_order(&norms).into_iter().map(|j| norms[j]).collect())
}

fn check_finite(a: &DenseMatrix) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::contract("svd input has non-finite entries"));
    }
    Ok(())
}

/// Thin SVD with `r = min(m, n)` singular triplets.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    check_finite(a)?;
    if a.rows() < a.cols() {
        let f = svd(&a.transpose())?;
        return Ok(SvdFactors {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        });
    }
    let (m, n) = a.shape();
    let (mut w, q) = if m > n {
        let f = qr_unpivoted(a);
        (f.r, Some(f.q))
    } else {
        (a.clone(), None)
    };
    let mut v = DenseMatrix::identity(n);
    let norms = jacobi_sweeps(&mut w, Some(&mut v))?;
    let order = sorted_order(&norms);
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = v.select_cols(&order);
    let w = w.select_cols(&order);

    let smax = sigma.first().copied().unwrap_or(0.0);
    let tiny = smax * n as f64 * f64::EPSILON;
    let mut u = DenseMatrix::zeros(n, n);
    let mut filled = Vec::new();
    for j in 0..n {
        if sigma[j] > tiny && sigma[j] > 0.0 {
            let inv = 1.0 / sigma[j];
            for (d, s) in u.col_mut(j).iter_mut().zip(w.col(j)) {
                *d = s * inv;
            }
            filled.push(j);
        }
    }
    complete_basis(&mut u, &filled);
    let u = match q {
        Some(q) => matmul(&q, &u)?,
        None => u,
    };
    Ok(SvdFactors { u, sigma, v })
}

/// Fills the columns of `u` not listed in `filled` with an orthonormal
/// complement, drawn from the coordinate axes by modified Gram-Schmidt.
fn complete_basis(u: &mut DenseMatrix, filled: &[usize]) {
    let n = u.rows();
    let mut have: Vec<usize> = filled.to_vec();
    let missing: Vec<usize> = (0..u.cols()).filter(|j| !filled.contains(j)).collect();
    let mut axis = 0;
    for j in missing {
        loop {
            assert!(axis < n, "ran out of axes completing basis");
            let mut cand = vec![0.0; n];
            cand[axis] = 1.0;
            axis += 1;
            for _ in 0..2 {
                for &h in &have {
                    let col = u.col(h);
                    let d: f64 = col.iter().zip(&cand).map(|(a, b)| a * b).sum();
                    for (c, x) in cand.iter_mut().zip(col) {
                        *c -= d * x;
                    }
                }
            }
            let norm = super::matrix::frobenius(&cand);
            if norm > 0.5 {
                for (d, c) in u.col_mut(j).iter_mut().zip(&cand) {
                    *d = c / norm;
                }
                have.push(j);
                break;
            }
        }
    }
}

/// Minimum-norm least-squares solution `A^+ B`, discarding singular values
/// below `1e-12 * sigma_max`.
pub fn pinv_apply(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::dims(
            "pinv_apply",
            format!("A has {} rows, B has {}", a.rows(), b.rows()),
        ));
    }
    let f = svd(a)?;
    let cutoff = 1e-12 * f.sigma.first().copied().unwrap_or(0.0);
    let keep = f.sigma.iter().take_while(|&&s| s > cutoff).count();
    use super::blas::{gemm, Op};
    let u = f.u.columns(0..keep);
    let mut utb = gemm(&u, Op::Trans, b, Op::NoTrans)?;
    for i in 0..keep {
        let inv = 1.0 / f.sigma[i];
        for j in 0..utb.cols() {
            utb[(i, j)] *= inv;
        }
    }
    matmul(&f.v.columns(0..keep), &utb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_swap() {
        let s = singular_values(&DenseMatrix::diag(&[2.0, 1.0])).unwrap();
        assert_eq!(s, vec![2.0, 1.0]);
        let f = svd(&DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0]);
    }

    #[test]
    fn tail_norms() {
        assert_eq!(svd_tail_norm(&[3.0, 2.0, 1.0], 3), 0.0);
        assert!((svd_tail_norm(&[3.0, 2.0, 1.0], 1) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(svd_tail_norm(&[1.0], 0), 1.0);
    }

    #[test]
    fn rank_deficient_u_is_orthonormal() {
        let a = DenseMatrix::from_fn(6, 4, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let f = svd(&a).unwrap();
        let utu = super::super::blas::gemm(&f.u, super::super::blas::Op::Trans, &f.u, super::super::blas::Op::NoTrans).unwrap();
        assert!(utu.distance(&DenseMatrix::identity(4)).unwrap() < 1e-13);
        assert!(f.reconstruct().distance(&a).unwrap() < 1e-12 * a.frobenius_norm());
        assert!(f.sigma[1] < 1e-13 * f.sigma[0]);
    }

    #[test]
    fn wide_input_transposes() {
        let a = DenseMatrix::from_fn(3, 5, |i, j| ((i * 5 + j * 2) % 7) as f64 - 3.0);
        let f = svd(&a).unwrap();
        assert_eq!(f.u.shape(), (3, 3));
        assert_eq!(f.v.shape(), (5, 3));
        assert!(f.reconstruct().distance(&a).unwrap() < 1e-13 * a.frobenius_norm());
    }

    #[test]
    fn pinv_truncates_null_direction() {
        let a = DenseMatrix::diag(&[2.0, 0.0]);
        let b = DenseMatrix::from_rows(&[[2.0], [2.0]]);
        let x = pinv_apply(&a, &b).unwrap();
        assert!(x.distance(&DenseMatrix::from_rows(&[[1.0], [0.0]])).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_nan() {
        let mut a = DenseMatrix::identity(2);
        a[(0, 1)] = f64::NAN;
        assert!(svd(&a).is_err());
    }
}
