use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Row-compressed sparse sign matrix: row `i` holds `zeta` pairs
/// `(cols[i*zeta + t], signs[i*zeta + t])`, all entries scaled by `scale`.
#[derive(Clone, Debug)]
pub struct SparseSignOperator {
    pub(crate) n: usize,
    pub(crate) ell: usize,
    pub(crate) zeta: usize,
    pub(crate) cols: Vec<usize>,
    pub(crate) signs: Vec<f64>,
    pub(crate) scale: f64,
}

impl SparseSignOperator {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.ell
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(column, signed value)` pairs of row `i`.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = i * self.zeta..(i + 1) * self.zeta;
        self.cols[r.clone()]
            .iter()
            .zip(&self.signs[r])
            .map(move |(&c, &s)| (c, s * self.scale))
    }

    /// `A * Omega` as a sum of scaled columns of `A`.
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.n {
            return Err(Error::dims(
                "sparse sign apply",
                format!("operator has {} rows, A has {} cols", self.n, a.cols()),
            ));
        }
        let mut out = DenseMatrix::zeros(a.rows(), self.ell);
        for i in 0..self.n {
            let src = a.col(i);
            for (c, v) in self.row_entries(i) {
                for (d, &x) in out.col_mut(c).iter_mut().zip(src) {
                    *d += v * x;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n, self.ell);
        for i in 0..self.n {
            for (c, v) in self.row_entries(i) {
                out[(i, c)] = v;
            }
        }
        out
    }
}
