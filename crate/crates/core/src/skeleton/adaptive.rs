use crate::dense::{Absorbed, BlockedLu, DenseMatrix, SchurBlock};
use crate::error::{Error, Result};
use crate::sketch::{RngStream, SketchSpec};

use super::interp::{interpolation_from_lu, RowId};
use super::{ErrorTrace, SkeletonResult, Status, TraceRecord};

/// Stopping rule for [`rand_lupp_adap`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    /// Columns of fresh sketch per iteration.
    pub block: usize,
    /// Absolute Frobenius-norm tolerance.
    pub tau: f64,
    /// Largest rank the driver may reach; see [`default_max_rank`].
    pub max_rank: Option<usize>,
}

impl AdaptiveOptions {
    pub fn new(block: usize, tau: f64) -> Self {
        AdaptiveOptions {
            block,
            tau,
            max_rank: None,
        }
    }

    pub fn with_max_rank(mut self, max_rank: usize) -> Self {
        self.max_rank = Some(max_rank);
        self
    }
}

/// `min(m, n) - b`, but never below one block.
pub fn default_max_rank(m: usize, n: usize, b: usize) -> usize {
    m.min(n).saturating_sub(b).max(b)
}

/// A fresh sketch block and its Schur complement, not yet absorbed.
#[derive(Clone, Debug)]
pub struct PendingBlock {
    pub sample: DenseMatrix,
    pub schur: SchurBlock,
}

impl PendingBlock {
    /// Frobenius norm of the Schur complement, the error estimate.
    pub fn e_schur(&self) -> f64 {
        self.schur.norm()
    }
}

/// Growing LU factorization of the accumulated sketch, one block at a time.
///
/// Block `t` is drawn from stream `rng.fork(t)`, so a run is a pure
/// function of the seed.
#[derive(Clone, Debug)]
pub struct AdaptiveState {
    lu: BlockedLu,
    block: usize,
    blocks_drawn: u64,
    spec: SketchSpec,
    rng: RngStream,
}

impl AdaptiveState {
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn rank(&self) -> usize {
        self.lu.rank()
    }

    /// Number of sketch blocks drawn so far, absorbed or not.
    pub fn blocks_drawn(&self) -> u64 {
        self.blocks_drawn
    }

    pub fn lu(&self) -> &BlockedLu {
        &self.lu
    }

    /// Accumulated sample `[Y0 | Y1 | ...]`.
    pub fn sample(&self) -> &DenseMatrix {
        self.lu.sample()
    }

    pub fn row_skeleton(&self) -> Vec<usize> {
        self.lu.pivot_rows().to_vec()
    }

    /// `W = P^T [I; L2 L1^{-1}]` for the current rank.
    pub fn interpolation(&self) -> Result<DenseMatrix> {
        interpolation_from_lu(self.lu.l(), self.lu.perm())
    }

    pub fn row_id(&self) -> Result<RowId> {
        Ok(RowId {
            rows: self.row_skeleton(),
            w: self.interpolation()?,
        })
    }

    /// Draws the next independent block and forms its Schur complement.
    pub fn draw(&mut self, a: &DenseMatrix) -> Result<PendingBlock> {
        let k = self.rank();
        let (m, n) = a.shape();
        if m != self.lu.rows() {
            return Err(Error::dims(
                "adaptive step",
                format!("state has {} rows, A has {m}", self.lu.rows()),
            ));
        }
        if k + self.block > m.min(n) {
            return Err(Error::contract(format!(
                "rank {k} plus block {} exceeds min(m, n) = {}",
                self.block,
                m.min(n)
            )));
        }
        let stream = self.rng.fork(self.blocks_drawn);
        self.blocks_drawn += 1;
        let sample = self.spec.resized(n, self.block).draw(&stream)?.apply(a)?;
        let schur = self.lu.schur(&sample)?;
        Ok(PendingBlock { sample, schur })
    }

    /// Factors a pending block into the state, truncating at a zero pivot.
    pub fn absorb(&mut self, pending: &PendingBlock) -> Result<Absorbed> {
        self.lu.absorb(&pending.schur, &pending.sample)
    }
}

/// Factors the first sketch block `A Omega_0` (`b` columns).
pub fn adaptive_init(a: &DenseMatrix, b: usize, spec: &SketchSpec, rng: &RngStream) -> Result<AdaptiveState> {
    let (m, n) = a.shape();
    if b == 0 || b > m.min(n) {
        return Err(Error::contract(format!(
            "block size must satisfy 1 <= b <= min(m, n) = {}, got {b}",
            m.min(n)
        )));
    }
    let mut state = AdaptiveState {
        lu: BlockedLu::new(m),
        block: b,
        blocks_drawn: 0,
        spec: *spec,
        rng: *rng,
    };
    let first = state.draw(a)?;
    state.lu.extend(&first.sample)?;
    Ok(state)
}

/// One iteration: estimate the error with a fresh block, then absorb it.
/// Returns the Schur norm measured before absorption.
pub fn adaptive_step(state: &mut AdaptiveState, a: &DenseMatrix) -> Result<(f64, Absorbed)> {
    let pending = state.draw(a)?;
    let e = pending.e_schur();
    let absorbed = state.absorb(&pending)?;
    Ok((e, absorbed))
}

/// Adaptive randomized LUPP row ID.
///
/// Grows the rank by `opts.block` until the Schur complement of a fresh
/// block falls to `opts.tau`. The returned rank is that of the
/// factorization certified by the last estimate; the block used for the
/// estimate is discarded.
pub fn rand_lupp_adap(
    a: &DenseMatrix,
    opts: &AdaptiveOptions,
    spec: &SketchSpec,
    rng: &RngStream,
) -> Result<SkeletonResult> {
    rand_lupp_adap_observed(a, opts, spec, rng, |_, _, _| Ok(()))
}

/// [`rand_lupp_adap`] calling `observe(state, pending, record)` at every
/// iteration, after the estimate and before the state changes. The
/// observer may fill the optional estimates of the trace record.
pub fn rand_lupp_adap_observed<F>(
    a: &DenseMatrix,
    opts: &AdaptiveOptions,
    spec: &SketchSpec,
    rng: &RngStream,
    mut observe: F,
) -> Result<SkeletonResult>
where
    F: FnMut(&AdaptiveState, Option<&PendingBlock>, &mut TraceRecord) -> Result<()>,
{
    if opts.tau.is_nan() || opts.tau <= 0.0 {
        return Err(Error::contract(format!("tau must be positive, got {}", opts.tau)));
    }
    let (m, n) = a.shape();
    let b = opts.block;
    let max_rank = opts
        .max_rank
        .unwrap_or_else(|| default_max_rank(m, n, b))
        .min(m.min(n));
    let mut state = adaptive_init(a, b, spec, rng)?;
    let mut trace = ErrorTrace::default();
    let status = loop {
        let k = state.rank();
        if k + b > m.min(n) {
            // nothing left to sample against
            let mut rec = TraceRecord::new(k, 0.0);
            observe(&state, None, &mut rec)?;
            trace.records.push(rec);
            break Status::Converged;
        }
        let pending = state.draw(a)?;
        let e = pending.e_schur();
        let mut rec = TraceRecord::new(k, e);
        observe(&state, Some(&pending), &mut rec)?;
        trace.records.push(rec);
        if e <= opts.tau {
            break Status::Converged;
        }
        if k + b > max_rank {
            break Status::NotConverged;
        }
        if state.absorb(&pending)?.zero_pivot.is_some() {
            break Status::RankExhausted;
        }
    };
    Ok(SkeletonResult::row(state.row_id()?, trace, status))
}
