use anyhow::{Context, Result};
use skelid::dense::{singular_values, DenseMatrix};
use skelid::sketch::{RngStream, SketchKind, SketchSpec};
use skelid::zoo::MatrixRecipe;

use crate::config::ExperimentConfig;

/// Stream ids reserved for the harness; trials use `TRIAL_BASE + trial`.
pub(crate) const MATRIX_STREAM: u64 = 1;
pub(crate) const NORM_STREAM: u64 = 2;
pub(crate) const TRIAL_BASE: u64 = 1 << 32;

/// Columns of the sketch used to estimate `||A||_F`.
const NORM_SKETCH: usize = 32;

/// Stream that generated matrices are drawn from.
pub fn matrix_stream(seed: u64) -> RngStream {
    RngStream::new(seed, MATRIX_STREAM)
}

/// Input matrix in row-ID orientation (`rows >= cols`).
#[derive(Clone, Debug)]
pub struct Prepared {
    pub a: DenseMatrix,
    /// Set when the input had fewer rows than columns and was transposed.
    pub transposed: bool,
    sigma: Option<Vec<f64>>,
}

impl Prepared {
    pub fn from_matrix(a: DenseMatrix, sigma: Option<Vec<f64>>) -> Self {
        if a.rows() < a.cols() {
            Prepared {
                a: a.transpose(),
                transposed: true,
                sigma,
            }
        } else {
            Prepared {
                a,
                transposed: false,
                sigma,
            }
        }
    }

    pub fn load(recipe: &MatrixRecipe, seed: u64) -> Result<Self> {
        let (a, sigma) = recipe
            .build(&matrix_stream(seed))
            .with_context(|| format!("building matrix {recipe:?}"))?;
        Ok(Self::from_matrix(a, sigma))
    }

    pub fn orientation(&self) -> &'static str {
        if self.transposed {
            "transposed"
        } else {
            "as-given"
        }
    }

    /// Singular values, closed form when the generator knows them.
    pub fn sigma(&mut self) -> Result<&[f64]> {
        if self.sigma.is_none() {
            self.sigma = Some(singular_values(&self.a)?);
        }
        Ok(self.sigma.as_deref().unwrap())
    }
}

/// `||A Omega||_F` for an isometric Gaussian `Omega`; an unbiased
/// one-pass estimate of `||A||_F^2` after squaring.
pub fn estimate_frobenius(a: &DenseMatrix, rng: &RngStream) -> Result<f64> {
    let ell = NORM_SKETCH.min(a.cols()).max(1);
    let y = SketchSpec::gaussian(a.cols(), ell).draw(rng)?.apply(a)?;
    Ok(y.frobenius_norm())
}

/// Absolute tolerance for the run.
pub fn absolute_tau(cfg: &ExperimentConfig, a: &DenseMatrix) -> Result<f64> {
    if cfg.relative {
        Ok(cfg.tau * estimate_frobenius(a, &RngStream::new(cfg.seed, NORM_STREAM))?)
    } else {
        Ok(cfg.tau)
    }
}

pub fn sketch_spec(kind: SketchKind, cfg: &ExperimentConfig, n: usize) -> SketchSpec {
    let ell = cfg.block.min(n);
    let mut spec = SketchSpec::new(kind, n, ell).with_seed(cfg.seed);
    spec.zeta = cfg.zeta;
    spec.resized(n, ell)
}

pub fn trial_stream(cfg: &ExperimentConfig, trial: usize) -> RngStream {
    RngStream::new(cfg.seed, TRIAL_BASE + trial as u64)
}
