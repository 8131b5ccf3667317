//! Randomized row and column skeleton selection.
//!
//! A sketch `Y = A Omega` is factored with partially pivoted LU; the pivot
//! rows are the skeletons. The adaptive driver grows the sketch block by
//! block and stops once the Schur complement of a fresh, independent block
//! certifies the interpolative decomposition error.
//!
//! Modules:
//! - [`dense`]: matrices, products, LU/QR/SVD kernels.
//! - [`sketch`]: seeded Gaussian, trigonometric and sparse sign embeddings.
//! - [`skeleton`]: skeleton selection, adaptive driver, error evaluators,
//!   two-sided ID and CUR.
//! - [`zoo`]: test-matrix generators and file formats.

pub mod dense;
pub mod error;
pub mod skeleton;
pub mod sketch;
pub mod zoo;

pub use dense::{DenseMatrix, Permutation};
pub use error::{Error, Result};
