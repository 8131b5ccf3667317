//! Skeleton selection and interpolative decompositions.
//!
//! Row skeletons come from pivoting a sketch `Y = A Omega`: partial
//! pivoting ([`rand_lupp`], [`rand_lupp_adap`]) or column pivoted QR on
//! `Y^T` ([`rand_cpqr`]). Column, two-sided and CUR factorizations reuse
//! the row skeletons.

mod adaptive;
mod eval;
mod interp;
mod residual;
mod two_sided;

use crate::dense::DenseMatrix;

pub use adaptive::{
    adaptive_init, adaptive_step, default_max_rank, rand_lupp_adap, rand_lupp_adap_observed,
    AdaptiveOptions, AdaptiveState, PendingBlock,
};
pub use eval::{row_id_error, stable_row_id_error};
pub use interp::{
    interpolation_from_lu, rand_cpqr, rand_lupp, row_id_from_cpqr, row_id_from_lu, RowId,
};
pub use residual::{residual_ur_estimates, ur_estimates, UrEstimates, UrSample};
pub use two_sided::{
    column_id, condition_estimate_1, cur_decompose, two_sided_id, CurFactors,
    ILL_CONDITIONED_CORE,
};

/// How a skeleton computation ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    /// A fixed-rank method ran to the requested rank.
    FixedRank,
    /// The error estimate reached the tolerance.
    Converged,
    /// The rank cap was reached first; the result is the best so far.
    NotConverged,
    /// A sample block hit an exactly zero pivot; the rank was truncated.
    RankExhausted,
    /// The two-sided core `A(I, J)` is numerically singular.
    RankDeficient { condition: f64 },
}

/// One adaptive iteration: rank `k` and the error estimates made there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub e_schur: f64,
    pub est_norm: Option<f64>,
    pub est_max: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorTrace {
    pub records: Vec<TraceRecord>,
}

impl TraceRecord {
    pub fn new(k: usize, e_schur: f64) -> Self {
        TraceRecord {
            k,
            e_schur,
            est_norm: None,
            est_max: None,
        }
    }
}

impl ErrorTrace {
    pub fn push(&mut self, k: usize, e_schur: f64) {
        self.records.push(TraceRecord::new(k, e_schur));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Skeletons, interpolation factors and diagnostics.
///
/// A row ID is `A ~ W A(I, :)`, a column ID `A ~ A(:, J) X`, and a
/// two-sided ID `A ~ W A(I, J) X`.
#[derive(Clone, Debug)]
pub struct SkeletonResult {
    pub row_idx: Option<Vec<usize>>,
    pub col_idx: Option<Vec<usize>>,
    /// `m x k`, with `W(I, :) = I_k`.
    pub w: Option<DenseMatrix>,
    /// `k x n`, with `X(:, J) = I_k`.
    pub x: Option<DenseMatrix>,
    pub rank: usize,
    pub trace: ErrorTrace,
    pub status: Status,
}

impl SkeletonResult {
    pub(crate) fn row(id: RowId, trace: ErrorTrace, status: Status) -> Self {
        SkeletonResult {
            rank: id.rows.len(),
            row_idx: Some(id.rows),
            col_idx: None,
            w: Some(id.w),
            x: None,
            trace,
            status,
        }
    }

    /// Approximation of `a` assembled from whichever factors are present.
    pub fn reconstruct(&self, a: &DenseMatrix) -> crate::Result<DenseMatrix> {
        use crate::dense::matmul;
        use crate::Error;
        match (&self.row_idx, &self.col_idx, &self.w, &self.x) {
            (Some(i), Some(j), Some(w), Some(x)) => {
                let core = a.select_rows(i).select_cols(j);
                matmul(&matmul(w, &core)?, x)
            }
            (Some(i), _, Some(w), _) => matmul(w, &a.select_rows(i)),
            (_, Some(j), _, Some(x)) => matmul(&a.select_cols(j), x),
            _ => Err(Error::contract("result carries no interpolation factor")),
        }
    }

    /// `||A - approximation||_F`
    pub fn reconstruction_error(&self, a: &DenseMatrix) -> crate::Result<f64> {
        a.distance(&self.reconstruct(a)?)
    }

    /// Largest interpolation coefficient, `O(1)` for well-behaved pivoting.
    pub fn max_interp_entry(&self) -> f64 {
        let w = self.w.as_ref().map_or(0.0, |w| w.max_abs());
        let x = self.x.as_ref().map_or(0.0, |x| x.max_abs());
        w.max(x)
    }
}
