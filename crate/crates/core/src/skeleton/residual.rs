use crate::dense::{lupp_allow_singular, BlockedLu, DenseMatrix};
use crate::error::{Error, Result};
use crate::sketch::{RngStream, Scale, SketchSpec};

use super::AdaptiveState;

/// Oversampling block `Y_r = A Omega_r` reserved for the residual
/// triangular factor estimates. Draw it once and reuse it at every rank.
#[derive(Clone, Debug)]
pub struct UrSample {
    pub y: DenseMatrix,
    /// Factor that brings `U_r` to the unit-variance convention.
    pub compensation: f64,
}

impl UrSample {
    pub fn draw(a: &DenseMatrix, p: usize, spec: &SketchSpec, rng: &RngStream) -> Result<Self> {
        if p == 0 {
            return Err(Error::contract("oversampling p must be at least 1"));
        }
        let op = spec.resized(a.cols(), p).draw(rng)?;
        let compensation = match spec.scale {
            Scale::Unit => 1.0,
            Scale::InverseSqrtEll => (p as f64).sqrt(),
        };
        Ok(UrSample {
            y: op.apply(a)?,
            compensation,
        })
    }

    pub fn p(&self) -> usize {
        self.y.cols()
    }
}

/// Size of `U_r` and the error estimates derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UrEstimates {
    /// `||U_r||_F` in the unit-variance convention.
    pub norm_ur: f64,
    /// `max |U_r|` in the unit-variance convention.
    pub max_ur: f64,
    /// `(4 ln k / k) sqrt(m - k) ||U_r||_F`
    pub est_norm: f64,
    /// `(4 ln k / k) sqrt(m - k) max |U_r|`
    pub est_max: f64,
}

/// Reference factor `(4 ln k / k) sqrt(m - k)`.
pub(crate) fn growth_reference(k: usize, m: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    4.0 * kf.ln() / kf * ((m - k) as f64).sqrt()
}

/// Eliminates the oversampling block against the rank-`k` factorization in
/// `lu`; the trailing `p x p` upper triangle is `U_r`.
pub fn ur_estimates(lu: &BlockedLu, sample: &UrSample) -> Result<UrEstimates> {
    let m = lu.rows();
    let k = lu.rank();
    let p = sample.p();
    if k + p > m {
        return Err(Error::contract(format!(
            "rank {k} plus oversampling {p} exceeds {m} rows"
        )));
    }
    let schur = lu.schur(&sample.y)?;
    let f = lupp_allow_singular(&schur.s)?;
    let ur = f.u.scaled(sample.compensation);
    let c = growth_reference(k, m);
    let norm_ur = ur.frobenius_norm();
    let max_ur = ur.max_abs();
    Ok(UrEstimates {
        norm_ur,
        max_ur,
        est_norm: c * norm_ur,
        est_max: c * max_ur,
    })
}

/// Draws `Y_r` with `p` columns and evaluates the `U_r` estimates at the
/// state's current rank. Requires `p < b`.
pub fn residual_ur_estimates(
    state: &AdaptiveState,
    a: &DenseMatrix,
    p: usize,
    spec: &SketchSpec,
    rng: &RngStream,
) -> Result<UrEstimates> {
    if p >= state.block() {
        return Err(Error::contract(format!(
            "oversampling p = {p} must be below the block size {}",
            state.block()
        )));
    }
    ur_estimates(state.lu(), &UrSample::draw(a, p, spec, rng)?)
}
