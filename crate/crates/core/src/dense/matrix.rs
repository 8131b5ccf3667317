use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};

/// Column-major dense matrix of `f64`.
///
/// Zero-sized dimensions are allowed so that empty trailing blocks (for
/// example the rows below a fully factored panel) need no special casing.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(
                "from_col_major",
                format!("{} values for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from a list of rows. Panics on ragged input; intended
    /// for literals in tests and small fixtures.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(
            rows.iter().all(|r| r.as_ref().len() == n),
            "ragged row literal"
        );
        Self::from_fn(m, n, |i, j| rows[i].as_ref()[j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                t.data[j + i * self.cols] = v;
            }
        }
        t
    }

    /// Copies the contiguous block `rows x cols`.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (jo, j) in cols.enumerate() {
            out.col_mut(jo)
                .copy_from_slice(&self.col(j)[rows.start..rows.end]);
        }
        out
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, src: &DenseMatrix) {
        assert!(row0 + src.rows <= self.rows && col0 + src.cols <= self.cols);
        for j in 0..src.cols {
            self.col_mut(col0 + j)[row0..row0 + src.rows].copy_from_slice(src.col(j));
        }
    }

    pub fn columns(&self, cols: Range<usize>) -> DenseMatrix {
        self.block(0..self.rows, cols)
    }

    /// `A(idx, :)`
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(idx.len(), self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            for (d, &i) in dst.iter_mut().zip(idx) {
                *d = src[i];
            }
        }
        out
    }

    /// `A(:, idx)`
    pub fn select_cols(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        DenseMatrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::dims(
                "hcat",
                format!("{} rows vs {} rows", self.rows, other.rows),
            ));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// Appends the columns of `other` in place.
    pub fn append_cols(&mut self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::dims(
                "append_cols",
                format!("{} rows vs {} rows", self.rows, other.rows),
            ));
        }
        self.data.extend_from_slice(&other.data);
        self.cols += other.cols;
        Ok(())
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::dims(
                "vcat",
                format!("{} cols vs {} cols", self.cols, other.cols),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self - other`
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::dims(
                "sub",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Frobenius norm of `self - other` without allocating.
    pub fn distance(&self, other: &DenseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::dims(
                "distance",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        let mut scale = 0.0_f64;
        let mut ssq = 1.0_f64;
        for (a, b) in self.data.iter().zip(&other.data) {
            accumulate(&mut scale, &mut ssq, a - b);
        }
        Ok(scale * ssq.sqrt())
    }

    /// Zeroes entries strictly below the diagonal.
    pub fn upper_triangle(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            if i <= j {
                self[(i, j)]
            } else {
                0.0
            }
        })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        let shown = self.rows.min(8);
        for i in 0..shown {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            if self.cols > 8 {
                write!(f, "...")?;
            }
            writeln!(f)?;
        }
        if self.rows > shown {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Overflow-safe Euclidean norm of a slice (scaled sum of squares).
pub fn frobenius(values: &[f64]) -> f64 {
    let mut scale = 0.0_f64;
    let mut ssq = 1.0_f64;
    for &v in values {
        accumulate(&mut scale, &mut ssq, v);
    }
    scale * ssq.sqrt()
}

#[inline]
fn accumulate(scale: &mut f64, ssq: &mut f64, v: f64) {
    if v != 0.0 {
        let a = v.abs();
        if *scale < a {
            *ssq = 1.0 + *ssq * (*scale / a) * (*scale / a);
            *scale = a;
        } else {
            *ssq += (a / *scale) * (a / *scale);
        }
    }
}

/// Row or column permutation stored as an index vector.
///
/// Entry `i` names the original index that lands in position `i`, so
/// `apply_rows(A)` returns `A(perm, :)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            perm: (0..n).collect(),
        }
    }

    pub fn from_vec(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract(format!(
                    "index vector of length {} is not a permutation",
                    perm.len()
                )));
            }
        }
        Ok(Permutation { perm })
    }

    /// Converts LAPACK-style sequential row interchanges (`swaps[i]` was
    /// exchanged with row `i`) into a permutation of length `n`.
    pub fn from_swaps(swaps: &[usize], n: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        for (i, &s) in swaps.iter().enumerate() {
            perm.swap(i, s);
        }
        Permutation { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.perm
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { perm: inv }
    }

    /// `A(perm, :)`
    pub fn apply_rows(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.len() {
            return Err(Error::dims(
                "apply_rows",
                format!("permutation of {} vs {} rows", self.len(), a.rows()),
            ));
        }
        Ok(a.select_rows(&self.perm))
    }

    /// `A(:, perm)`
    pub fn apply_cols(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.len() {
            return Err(Error::dims(
                "apply_cols",
                format!("permutation of {} vs {} cols", self.len(), a.cols()),
            ));
        }
        Ok(a.select_cols(&self.perm))
    }

    /// Permutes the positions `offset..` by `inner`, leaving the leading
    /// `offset` positions untouched: `diag(I, inner) * self`.
    pub fn compose_trailing(&mut self, offset: usize, inner: &Permutation) {
        assert_eq!(offset + inner.len(), self.len());
        let tail: Vec<usize> = inner.perm.iter().map(|&p| self.perm[offset + p]).collect();
        self.perm[offset..].copy_from_slice(&tail);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_of_identity() {
        assert!((DenseMatrix::identity(2).frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn permute_then_inverse_restores() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        let p = Permutation::from_vec(vec![2, 0, 3, 1]).unwrap();
        let pa = p.apply_rows(&a).unwrap();
        assert_eq!(pa.row(0), a.row(2));
        let back = p.inverse().apply_rows(&pa).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::from_vec(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_vec(vec![0, 3]).is_err());
    }

    #[test]
    fn swaps_to_perm() {
        // swap 0<->2 then 1<->2 on [0,1,2]: [2,1,0] -> [2,0,1]
        let p = Permutation::from_swaps(&[2, 2], 3);
        assert_eq!(p.as_slice(), &[2, 0, 1]);
    }

    #[test]
    fn compose_trailing_matches_block_product() {
        let mut p = Permutation::from_vec(vec![3, 1, 0, 2]).unwrap();
        let inner = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        p.compose_trailing(1, &inner);
        assert_eq!(p.as_slice(), &[3, 2, 1, 0]);
    }

    #[test]
    fn transpose_and_blocks() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let t = a.transpose();
        assert_eq!(t, DenseMatrix::from_rows(&[[1.0, 4.0], [2.0, 5.0], [3.0, 6.0]]));
        assert_eq!(a.block(1..2, 1..3), DenseMatrix::from_rows(&[[5.0, 6.0]]));
        let h = a.hcat(&a.columns(0..1)).unwrap();
        assert_eq!(h.row(1), vec![4.0, 5.0, 6.0, 4.0]);
        let v = a.vcat(&a).unwrap();
        assert_eq!(v.rows(), 4);
        assert_eq!(v.row(3), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn distance_is_overflow_safe() {
        let a = DenseMatrix::from_rows(&[[1e200, 0.0]]);
        let b = DenseMatrix::from_rows(&[[-1e200, 0.0]]);
        assert!((a.distance(&b).unwrap() / 2e200 - 1.0).abs() < 1e-15);
    }
}
