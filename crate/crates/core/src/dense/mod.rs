//! Deterministic dense kernels: storage, products, triangular solves,
//! pivoted factorizations and a reference SVD.

pub mod blas;
pub mod lu;
mod matrix;
pub mod qr;
pub mod svd;

pub use blas::{gemm, gemm_acc, matmul, triangular_solve, Diag, Op, Side, Uplo};
pub use lu::{growth_factor, lupp, lupp_allow_singular, lupp_partial, Absorbed, BlockedLu, LuFactors, SchurBlock};
pub use matrix::{frobenius, DenseMatrix, Permutation};
pub use qr::{cpqr, cpqr_r, qr_unpivoted, QrFactors};
pub use svd::{pinv_apply, singular_values, svd, svd_tail_norm, SvdFactors};
