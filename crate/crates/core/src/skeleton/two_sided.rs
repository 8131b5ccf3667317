use crate::dense::{lupp, pinv_apply, triangular_solve, DenseMatrix, Diag, LuFactors, Op, Side, Uplo};
use crate::error::Result;
use crate::sketch::{RngStream, SketchSpec};

use super::eval::product_error;
use super::interp::{interpolation_from_lu, rand_lupp};
use super::{ErrorTrace, SkeletonResult, Status};

/// Cores whose 1-norm condition estimate exceeds this are flagged.
pub const ILL_CONDITIONED_CORE: f64 = 1e14;

/// Column ID `A ~ A(:, J) X` by randomized LUPP on `A^T`.
pub fn column_id(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<SkeletonResult> {
    let t = rand_lupp(&a.transpose(), k, spec, rng)?;
    Ok(SkeletonResult {
        row_idx: None,
        col_idx: t.row_idx,
        w: None,
        x: t.w.map(|w| w.transpose()),
        rank: t.rank,
        trace: t.trace,
        status: t.status,
    })
}

/// Two-sided ID `A ~ W A(I, J) X`.
///
/// Row skeletons `I` come from randomized LUPP; column skeletons `J` and
/// `X` from LUPP of `A(I, :)^T`, so no second sketch is drawn.
pub fn two_sided_id(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<SkeletonResult> {
    let rows = rand_lupp(a, k, spec, rng)?;
    let i = rows.row_idx.expect("row ID carries indices");
    let r = a.select_rows(&i);
    let lu = lupp(&r.transpose())?;
    let j = lu.perm.as_slice()[..k].to_vec();
    let x = interpolation_from_lu(&lu.l, &lu.perm)?.transpose();
    let core = r.select_cols(&j);
    let condition = condition_estimate_1(&core);
    let status = if condition > ILL_CONDITIONED_CORE {
        Status::RankDeficient { condition }
    } else {
        Status::FixedRank
    };
    Ok(SkeletonResult {
        row_idx: Some(i),
        col_idx: Some(j),
        w: rows.w,
        x: Some(x),
        rank: k,
        trace: ErrorTrace::default(),
        status,
    })
}

/// `A ~ A(:, J) U A(I, :)`.
#[derive(Clone, Debug)]
pub struct CurFactors {
    pub col_idx: Vec<usize>,
    pub row_idx: Vec<usize>,
    /// `C^+ A R^+`, `k x k`.
    pub umid: DenseMatrix,
    pub status: Status,
}

impl CurFactors {
    pub fn c(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_cols(&self.col_idx)
    }

    pub fn r(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_rows(&self.row_idx)
    }

    pub fn reconstruction_error(&self, a: &DenseMatrix) -> Result<f64> {
        let cu = crate::dense::matmul(&self.c(a), &self.umid)?;
        product_error(a, &cu, &self.r(a))
    }
}

/// CUR with skeletons from [`two_sided_id`] and the linking matrix from
/// two least-squares solves.
pub fn cur_decompose(a: &DenseMatrix, k: usize, spec: &SketchSpec, rng: &RngStream) -> Result<CurFactors> {
    let id = two_sided_id(a, k, spec, rng)?;
    let (i, j) = (id.row_idx.unwrap(), id.col_idx.unwrap());
    let c = a.select_cols(&j);
    let r = a.select_rows(&i);
    // C^+ A, then (C^+ A) R^+ = ((R^T)^+ (C^+ A)^T)^T
    let ca = pinv_apply(&c, a)?;
    let umid = pinv_apply(&r.transpose(), &ca.transpose())?.transpose();
    Ok(CurFactors {
        col_idx: j,
        row_idx: i,
        umid,
        status: id.status,
    })
}

fn lu_solve(lu: &LuFactors, b: &[f64], trans: bool) -> Result<Vec<f64>> {
    let n = b.len();
    let p = lu.perm.as_slice();
    if !trans {
        // A x = b with A(p, :) = L U
        let pb = DenseMatrix::from_fn(n, 1, |i, _| b[p[i]]);
        let y = triangular_solve(&lu.l, &pb, Side::Left, Uplo::Lower, Op::NoTrans, Diag::Unit)?;
        let x = triangular_solve(&lu.u, &y, Side::Left, Uplo::Upper, Op::NoTrans, Diag::NonUnit)?;
        Ok(x.into_vec())
    } else {
        // A^T x = b: U^T L^T (P x) = b
        let bm = DenseMatrix::from_col_major(n, 1, b.to_vec())?;
        let y = triangular_solve(&lu.u, &bm, Side::Left, Uplo::Upper, Op::Trans, Diag::NonUnit)?;
        let z = triangular_solve(&lu.l, &y, Side::Left, Uplo::Lower, Op::Trans, Diag::Unit)?;
        let mut x = vec![0.0; n];
        for (i, &pi) in p.iter().enumerate() {
            x[pi] = z.as_slice()[i];
        }
        Ok(x)
    }
}

fn norm_1(a: &DenseMatrix) -> f64 {
    (0..a.cols())
        .map(|j| a.col(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Estimate of `||S||_1 ||S^{-1}||_1` for square `s` (Hager's method on
/// an LU factorization). Singular input gives infinity.
pub fn condition_estimate_1(s: &DenseMatrix) -> f64 {
    let n = s.rows();
    if n == 0 || s.cols() != n {
        return f64::INFINITY;
    }
    let lu = match lupp(s) {
        Ok(lu) => lu,
        Err(_) => return f64::INFINITY,
    };
    if (0..n).any(|i| lu.u[(i, i)] == 0.0) {
        return f64::INFINITY;
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for _ in 0..5 {
        let y = match lu_solve(&lu, &x, false) {
            Ok(y) => y,
            Err(_) => return f64::INFINITY,
        };
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = match lu_solve(&lu, &xi, true) {
            Ok(z) => z,
            Err(_) => return f64::INFINITY,
        };
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bj, bv), (j, &v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx {
            break;
        }
        x = vec![0.0; n];
        x[jmax] = 1.0;
    }
    let c = est * norm_1(s);
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_of_diagonal() {
        let s = DenseMatrix::diag(&[4.0, 2.0, 0.5]);
        assert!((condition_estimate_1(&s) - 8.0).abs() < 1e-12);
        let sing = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(condition_estimate_1(&sing) > 1e14);
    }

    #[test]
    fn condition_matches_exact_for_small_matrix() {
        // [[1,2],[3,4]]: ||A||_1 = 6, A^{-1} = [[-2,1],[1.5,-0.5]], ||A^{-1}||_1 = 3.5
        let s = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert!((condition_estimate_1(&s) - 21.0).abs() < 1e-12);
    }
}
