use crate::dense::{gemm, gemm_acc, matmul, qr_unpivoted, DenseMatrix, Op};
use crate::error::{Error, Result};

fn check_skeleton(a: &DenseMatrix, rows: &[usize]) -> Result<()> {
    if let Some(&bad) = rows.iter().find(|&&r| r >= a.rows()) {
        return Err(Error::contract(format!(
            "skeleton row {bad} out of range for {} rows",
            a.rows()
        )));
    }
    Ok(())
}

/// `||A - W A(I, :)||_F`
pub fn row_id_error(a: &DenseMatrix, rows: &[usize], w: &DenseMatrix) -> Result<f64> {
    check_skeleton(a, rows)?;
    if w.shape() != (a.rows(), rows.len()) {
        return Err(Error::dims(
            "row ID error",
            format!("W is {:?}, expected {}x{}", w.shape(), a.rows(), rows.len()),
        ));
    }
    let mut r = a.clone();
    gemm_acc(-1.0, w, Op::NoTrans, &a.select_rows(rows), Op::NoTrans, 1.0, &mut r)?;
    Ok(r.frobenius_norm())
}

/// Distance from `A` to its orthogonal projection onto the span of the
/// skeleton rows: `||A - A Q Q^T||_F` with `Q` an orthonormal basis of
/// `A(I, :)^T`.
pub fn stable_row_id_error(a: &DenseMatrix, rows: &[usize]) -> Result<f64> {
    check_skeleton(a, rows)?;
    if rows.is_empty() {
        return Ok(a.frobenius_norm());
    }
    let q = qr_unpivoted(&a.select_rows(rows).transpose()).q;
    let aq = matmul(a, &q)?;
    let mut r = a.clone();
    gemm_acc(-1.0, &aq, Op::NoTrans, &q, Op::Trans, 1.0, &mut r)?;
    Ok(r.frobenius_norm())
}

/// `||A - B||_F` for a product `B = C D` without keeping the residual.
pub(crate) fn product_error(a: &DenseMatrix, c: &DenseMatrix, d: &DenseMatrix) -> Result<f64> {
    a.distance(&gemm(c, Op::NoTrans, d, Op::NoTrans)?)
}
