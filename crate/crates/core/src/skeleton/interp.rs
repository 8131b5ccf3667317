use crate::dense::{cpqr_r, lupp, triangular_solve, DenseMatrix, Diag, Op, Permutation, Side, Uplo};
use crate::error::{Error, Result};
use crate::sketch::{RngStream, SketchSpec};

use super::{ErrorTrace, SkeletonResult, Status};

/// Row skeleton indices with their interpolation matrix.
#[derive(Clone, Debug)]
pub struct RowId {
    pub rows: Vec<usize>,
    pub w: DenseMatrix,
}

/// Scatters `[I_k; T]` back to original row order: row `perm[i]` of the
/// result is `e_i` for `i < k` and row `i - k` of `tail` otherwise.
fn scatter_interpolation(perm: &[usize], k: usize, tail: &DenseMatrix) -> DenseMatrix {
    let m = perm.len();
    let mut w = DenseMatrix::zeros(m, k);
    for (i, &r) in perm[..k].iter().enumerate() {
        w.col_mut(i)[r] = 1.0;
    }
    for j in 0..k {
        let src = tail.col(j);
        let dst = w.col_mut(j);
        for (t, &r) in perm[k..].iter().enumerate() {
            dst[r] = src[t];
        }
    }
    w
}

/// `W = P^T [I; L2 L1^{-1}]` from the unit lower trapezoidal factor `l`
/// (`m x k`, rows in pivoted order).
pub fn interpolation_from_lu(l: &DenseMatrix, perm: &Permutation) -> Result<DenseMatrix> {
    let (m, k) = l.shape();
    if perm.len() != m {
        return Err(Error::dims(
            "interpolation",
            format!("L has {m} rows, permutation has {}", perm.len()),
        ));
    }
    let l1 = l.block(0..k, 0..k);
    let l2 = l.block(k..m, 0..k);
    let tail = triangular_solve(&l1, &l2, Side::Right, Uplo::Lower, Op::NoTrans, Diag::Unit)?;
    Ok(scatter_interpolation(perm.as_slice(), k, &tail))
}

/// Row ID from partially pivoted LU of a sample `y` (`m x k`).
pub fn row_id_from_lu(y: &DenseMatrix) -> Result<RowId> {
    let lu = lupp(y)?;
    let k = y.cols();
    Ok(RowId {
        rows: lu.perm.as_slice()[..k].to_vec(),
        w: interpolation_from_lu(&lu.l, &lu.perm)?,
    })
}

/// Row ID from column pivoted QR of `y^T` truncated at `k` steps:
/// `W(P, :) = [I_k; (R11^{-1} R12)^T]`.
pub fn row_id_from_cpqr(y: &DenseMatrix, k: usize) -> Result<RowId> {
    let m = y.rows();
    if k == 0 || k > y.cols().min(m) {
        return Err(Error::contract(format!(
            "cpqr row ID needs 1 <= k <= {}, got {k}",
            y.cols().min(m)
        )));
    }
    let (r, perm) = cpqr_r(&y.transpose(), Some(k))?;
    let r11 = r.block(0..k, 0..k);
    let r12 = r.block(0..k, k..m);
    let t = triangular_solve(&r11, &r12, Side::Left, Uplo::Upper, Op::NoTrans, Diag::NonUnit)?;
    Ok(RowId {
        rows: perm.as_slice()[..k].to_vec(),
        w: scatter_interpolation(perm.as_slice(), k, &t.transpose()),
    })
}

fn check_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    let lim = a.rows().min(a.cols());
    if k == 0 || k > lim {
        return Err(Error::contract(format!(
            "rank must satisfy 1 <= k <= min(m, n) = {lim}, got {k}"
        )));
    }
    Ok(())
}

pub(crate) fn sample(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<DenseMatrix> {
    check_rank(a, k)?;
    spec.resized(a.cols(), k).draw(rng)?.apply(a)
}

/// Rank-`k` row ID by partially pivoted LU of one sketch `A Omega`.
pub fn rand_lupp(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<SkeletonResult> {
    let y = sample(a, k, spec, rng)?;
    Ok(SkeletonResult::row(row_id_from_lu(&y)?, ErrorTrace::default(), Status::FixedRank))
}

/// Rank-`k` row ID by column pivoted QR of `(A Omega)^T`.
pub fn rand_cpqr(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<SkeletonResult> {
    let y = sample(a, k, spec, rng)?;
    Ok(SkeletonResult::row(row_id_from_cpqr(&y, k)?, ErrorTrace::default(), Status::FixedRank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::matmul;

    #[test]
    fn lu_interpolation_has_identity_rows() {
        let y = DenseMatrix::from_fn(7, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0 + 0.1 * j as f64);
        let id = row_id_from_lu(&y).unwrap();
        let sub = id.w.select_rows(&id.rows);
        assert_eq!(sub, DenseMatrix::identity(3));
        // W reproduces the sample exactly in exact arithmetic
        let back = matmul(&id.w, &y.select_rows(&id.rows)).unwrap();
        assert!(back.distance(&y).unwrap() < 1e-12 * y.frobenius_norm());
    }

    #[test]
    fn cpqr_interpolation_has_identity_rows() {
        let y = DenseMatrix::from_fn(9, 4, |i, j| ((i * 7 + j * j) % 5) as f64 + (i as f64 * 0.3).cos());
        let id = row_id_from_cpqr(&y, 4).unwrap();
        assert_eq!(id.w.select_rows(&id.rows), DenseMatrix::identity(4));
        let back = matmul(&id.w, &y.select_rows(&id.rows)).unwrap();
        assert!(back.distance(&y).unwrap() < 1e-11 * y.frobenius_norm());
        let mut seen = id.rows.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn rejects_bad_rank() {
        let a = DenseMatrix::identity(4);
        let spec = SketchSpec::gaussian(4, 1);
        let rng = RngStream::new(0, 0);
        assert!(rand_lupp(&a, 0, &spec, &rng).is_err());
        assert!(rand_cpqr(&a, 5, &spec, &rng).is_err());
    }
}
