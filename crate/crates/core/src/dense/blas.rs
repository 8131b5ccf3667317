//! Level-3 kernels: matrix products and triangular solves.

use crate::error::{Error, Result};

use super::DenseMatrix;

/// Whether an operand enters a product transposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    NoTrans,
    Trans,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Solve `op(T) X = B`.
    Left,
    /// Solve `X op(T) = B`.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uplo {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diag {
    /// Diagonal entries are taken as 1 and never read.
    Unit,
    NonUnit,
}

fn op_shape(a: &DenseMatrix, op: Op) -> (usize, usize) {
    match op {
        Op::NoTrans => (a.rows(), a.cols()),
        Op::Trans => (a.cols(), a.rows()),
    }
}

fn op_strides(a: &DenseMatrix, op: Op) -> (isize, isize) {
    let ld = a.rows().max(1) as isize;
    match op {
        Op::NoTrans => (1, ld),
        Op::Trans => (ld, 1),
    }
}

/// `op(A) * op(B)`.
pub fn gemm(a: &DenseMatrix, op_a: Op, b: &DenseMatrix, op_b: Op) -> Result<DenseMatrix> {
    let (m, _) = op_shape(a, op_a);
    let (_, n) = op_shape(b, op_b);
    let mut c = DenseMatrix::zeros(m, n);
    gemm_acc(1.0, a, op_a, b, op_b, 0.0, &mut c)?;
    Ok(c)
}

/// Plain product `A * B`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    gemm(a, Op::NoTrans, b, Op::NoTrans)
}

/// `C <- alpha * op(A) * op(B) + beta * C`.
pub fn gemm_acc(
    alpha: f64,
    a: &DenseMatrix,
    op_a: Op,
    b: &DenseMatrix,
    op_b: Op,
    beta: f64,
    c: &mut DenseMatrix,
) -> Result<()> {
    let (m, k) = op_shape(a, op_a);
    let (kb, n) = op_shape(b, op_b);
    if k != kb || c.rows() != m || c.cols() != n {
        return Err(Error::dims(
            "gemm",
            format!(
                "op(A) is {m}x{k}, op(B) is {kb}x{n}, C is {}x{}",
                c.rows(),
                c.cols()
            ),
        ));
    }
    if m == 0 || n == 0 {
        return Ok(());
    }
    if k == 0 {
        c.scale(beta);
        return Ok(());
    }
    let (rsa, csa) = op_strides(a, op_a);
    let (rsb, csb) = op_strides(b, op_b);
    let ldc = m as isize;
    // SAFETY: the strides describe exactly the column-major storage of `a`,
    // `b` and `c`, whose lengths were checked through the shapes above, and
    // `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_slice().as_ptr(),
            rsa,
            csa,
            b.as_slice().as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_slice().as_mut_ptr(),
            1,
            ldc,
        );
    }
    Ok(())
}

/// `C <- C - A * B` on a column-major sub-block of a larger buffer.
///
/// `a` is `m x k` with leading dimension `lda`, `b` is `k x n` with leading
/// dimension `ldb`, and `c` starts at the block's first entry with leading
/// dimension `ldc`.
pub(crate) fn gemm_sub_block(
    m: usize,
    n: usize,
    k: usize,
    a: &[f64],
    lda: usize,
    b: &[f64],
    ldb: usize,
    c: &mut [f64],
    ldc: usize,
) {
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    assert!(lda >= m && ldb >= k && ldc >= m);
    assert!(a.len() >= (k - 1) * lda + m);
    assert!(b.len() >= (n - 1) * ldb + k);
    assert!(c.len() >= (n - 1) * ldc + m);
    // SAFETY: bounds asserted above; `c` is a unique borrow disjoint from
    // the shared borrows `a` and `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            -1.0,
            a.as_ptr(),
            1,
            lda as isize,
            b.as_ptr(),
            1,
            ldb as isize,
            1.0,
            c.as_mut_ptr(),
            1,
            ldc as isize,
        );
    }
}

/// Solves a triangular system without forming an inverse.
///
/// `Side::Left` returns `X` with `op(T) X = B`; `Side::Right` returns `X`
/// with `X op(T) = B`. Only the `uplo` triangle of `T` is read.
pub fn triangular_solve(
    t: &DenseMatrix,
    b: &DenseMatrix,
    side: Side,
    uplo: Uplo,
    trans: Op,
    diag: Diag,
) -> Result<DenseMatrix> {
    if t.rows() != t.cols() {
        return Err(Error::dims(
            "triangular_solve",
            format!("T must be square, got {}x{}", t.rows(), t.cols()),
        ));
    }
    let n = t.rows();
    match side {
        Side::Left => {
            if b.rows() != n {
                return Err(Error::dims(
                    "triangular_solve",
                    format!("T is {n}x{n} but B has {} rows", b.rows()),
                ));
            }
            let mut x = b.clone();
            solve_left_in_place(t, &mut x, uplo, trans, diag)?;
            Ok(x)
        }
        Side::Right => {
            if b.cols() != n {
                return Err(Error::dims(
                    "triangular_solve",
                    format!("T is {n}x{n} but B has {} cols", b.cols()),
                ));
            }
            // X op(T) = B  <=>  op(T)^T X^T = B^T
            let flipped = match trans {
                Op::NoTrans => Op::Trans,
                Op::Trans => Op::NoTrans,
            };
            let mut xt = b.transpose();
            solve_left_in_place(t, &mut xt, uplo, flipped, diag)?;
            Ok(xt.transpose())
        }
    }
}

fn check_diagonal(t: &DenseMatrix, diag: Diag) -> Result<()> {
    if diag == Diag::NonUnit {
        if let Some(index) = (0..t.rows()).find(|&i| t[(i, i)] == 0.0) {
            return Err(Error::Singular { index });
        }
    }
    Ok(())
}

fn solve_left_in_place(
    t: &DenseMatrix,
    x: &mut DenseMatrix,
    uplo: Uplo,
    trans: Op,
    diag: Diag,
) -> Result<()> {
    check_diagonal(t, diag)?;
    let n = t.rows();
    let unit = diag == Diag::Unit;
    for c in 0..x.cols() {
        let rhs = x.col_mut(c);
        match (uplo, trans) {
            // Column-oriented substitution: the active column of T is contiguous.
            (Uplo::Lower, Op::NoTrans) => {
                for j in 0..n {
                    if !unit {
                        rhs[j] /= t[(j, j)];
                    }
                    let xj = rhs[j];
                    if xj != 0.0 {
                        let tc = &t.col(j)[j + 1..];
                        for (r, &l) in rhs[j + 1..].iter_mut().zip(tc) {
                            *r -= xj * l;
                        }
                    }
                }
            }
            (Uplo::Upper, Op::NoTrans) => {
                for j in (0..n).rev() {
                    if !unit {
                        rhs[j] /= t[(j, j)];
                    }
                    let xj = rhs[j];
                    if xj != 0.0 {
                        let tc = &t.col(j)[..j];
                        for (r, &u) in rhs[..j].iter_mut().zip(tc) {
                            *r -= xj * u;
                        }
                    }
                }
            }
            // Transposed forms use dot products against contiguous columns.
            (Uplo::Lower, Op::Trans) => {
                for j in (0..n).rev() {
                    let tc = &t.col(j)[j + 1..];
                    let dot: f64 = tc.iter().zip(&rhs[j + 1..]).map(|(a, b)| a * b).sum();
                    rhs[j] -= dot;
                    if !unit {
                        rhs[j] /= t[(j, j)];
                    }
                }
            }
            (Uplo::Upper, Op::Trans) => {
                for j in 0..n {
                    let tc = &t.col(j)[..j];
                    let dot: f64 = tc.iter().zip(&rhs[..j]).map(|(a, b)| a * b).sum();
                    rhs[j] -= dot;
                    if !unit {
                        rhs[j] /= t[(j, j)];
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
        })
    }

    #[test]
    fn gemm_hand_example() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = DenseMatrix::from_rows(&[[5.0], [6.0]]);
        assert_eq!(
            matmul(&a, &b).unwrap(),
            DenseMatrix::from_rows(&[[17.0], [39.0]])
        );
    }

    #[test]
    fn gemm_identity_and_zero() {
        let b = DenseMatrix::from_fn(3, 4, |i, j| (i as f64) - 2.0 * j as f64);
        assert_eq!(matmul(&DenseMatrix::identity(3), &b).unwrap(), b);
        let z = matmul(&b, &DenseMatrix::zeros(4, 2)).unwrap();
        assert_eq!(z, DenseMatrix::zeros(3, 2));
    }

    #[test]
    fn gemm_transposes_match_naive() {
        let a = DenseMatrix::from_fn(5, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let b = DenseMatrix::from_fn(5, 4, |i, j| ((i + 2 * j) % 3) as f64 + 0.25);
        let got = gemm(&a, Op::Trans, &b, Op::NoTrans).unwrap();
        assert_eq!(got, naive(&a.transpose(), &b));
        let got = gemm(&b, Op::Trans, &a.transpose(), Op::Trans).unwrap();
        assert_eq!(got, naive(&b.transpose(), &a));
    }

    #[test]
    fn gemm_dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            matmul(&a, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lower_forward_substitution() {
        let t = DenseMatrix::from_rows(&[[2.0, 0.0], [1.0, 1.0]]);
        let b = DenseMatrix::from_rows(&[[2.0], [3.0]]);
        let x = triangular_solve(&t, &b, Side::Left, Uplo::Lower, Op::NoTrans, Diag::NonUnit)
            .unwrap();
        assert_eq!(x, DenseMatrix::from_rows(&[[1.0], [2.0]]));
    }

    #[test]
    fn identity_solve_is_noop() {
        let b = DenseMatrix::from_fn(3, 2, |i, j| (i + 10 * j) as f64);
        for uplo in [Uplo::Lower, Uplo::Upper] {
            for trans in [Op::NoTrans, Op::Trans] {
                let x = triangular_solve(
                    &DenseMatrix::identity(3),
                    &b,
                    Side::Left,
                    uplo,
                    trans,
                    Diag::NonUnit,
                )
                .unwrap();
                assert_eq!(x, b);
            }
        }
    }

    #[test]
    fn unit_diagonal_is_implicit() {
        // Garbage on the stored diagonal must be ignored with Diag::Unit.
        let stored = DenseMatrix::from_rows(&[[9.0, 0.0, 0.0], [0.5, -3.0, 0.0], [0.25, 0.75, 7.0]]);
        let mut explicit = stored.clone();
        for i in 0..3 {
            explicit[(i, i)] = 1.0;
        }
        let b = DenseMatrix::from_fn(3, 2, |i, j| 1.0 + i as f64 - j as f64);
        for side in [Side::Left, Side::Right] {
            let rhs = if side == Side::Left { b.clone() } else { b.transpose() };
            for trans in [Op::NoTrans, Op::Trans] {
                let x1 =
                    triangular_solve(&stored, &rhs, side, Uplo::Lower, trans, Diag::Unit).unwrap();
                let x2 = triangular_solve(&explicit, &rhs, side, Uplo::Lower, trans, Diag::NonUnit)
                    .unwrap();
                assert!(x1.distance(&x2).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn all_variants_solve() {
        let lower = DenseMatrix::from_rows(&[[2.0, 0.0, 0.0], [1.0, -3.0, 0.0], [0.5, 4.0, 1.5]]);
        let upper = lower.transpose();
        let b = DenseMatrix::from_fn(3, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        for (t, uplo) in [(&lower, Uplo::Lower), (&upper, Uplo::Upper)] {
            for trans in [Op::NoTrans, Op::Trans] {
                let opt = if trans == Op::Trans { t.transpose() } else { t.clone() };
                let x = triangular_solve(t, &b, Side::Left, uplo, trans, Diag::NonUnit).unwrap();
                assert!(naive(&opt, &x).distance(&b).unwrap() < 1e-13);
                let x = triangular_solve(t, &b, Side::Right, uplo, trans, Diag::NonUnit).unwrap();
                assert!(naive(&x, &opt).distance(&b).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_diagonal_is_singular() {
        let t = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]);
        let b = DenseMatrix::zeros(2, 1);
        let err = triangular_solve(&t, &b, Side::Left, Uplo::Lower, Op::NoTrans, Diag::NonUnit)
            .unwrap_err();
        assert!(matches!(err, Error::Singular { index: 1 }));
    }
}
