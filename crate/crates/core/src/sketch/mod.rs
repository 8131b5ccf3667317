//! Seeded random embeddings `Omega` (`n x ell`) and their application.
//!
//! Three families are provided: dense Gaussian, subsampled randomized
//! trigonometric transforms (SRTT) and sparse sign matrices. Under
//! [`Scale::InverseSqrtEll`] each family satisfies
//! `E ||X Omega||_F^2 = ||X||_F^2`, which is what makes the Schur
//! complement of a fresh block an unbiased squared-error estimate.
//! [`Scale::Unit`] multiplies the operator by `sqrt(ell)`, so every column
//! on its own is norm-preserving in expectation (variance-1 Gaussian
//! entries for the dense family).

mod rng;
mod sparse;
mod srtt;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{gemm, DenseMatrix, Op};
use crate::error::{Error, Result};

pub use rng::RngStream;
pub use sparse::SparseSignOperator;
pub use srtt::SrttOperator;

/// Nonzeros per row of a sparse sign sketch unless configured otherwise.
pub const DEFAULT_ZETA: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SketchKind {
    Gaussian,
    Srtt,
    SparseSign,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srtt => "srtt",
            SketchKind::SparseSign => "sparsesign",
        }
    }
}

impl std::str::FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(SketchKind::Gaussian),
            "srtt" => Ok(SketchKind::Srtt),
            "sparsesign" | "sparse-sign" | "sparse" | "ss" => Ok(SketchKind::SparseSign),
            other => Err(Error::contract(format!("unknown sketch kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scale {
    /// Each column is norm-preserving in expectation.
    Unit,
    /// The whole operator is norm-preserving in expectation.
    InverseSqrtEll,
}

/// Distribution and shape of a sketching operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SketchSpec {
    pub kind: SketchKind,
    pub n: usize,
    pub ell: usize,
    pub scale: Scale,
    /// Nonzeros per row; only read for [`SketchKind::SparseSign`].
    pub zeta: usize,
    /// Base seed used by [`SketchSpec::stream`].
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(kind: SketchKind, n: usize, ell: usize) -> Self {
        SketchSpec {
            kind,
            n,
            ell,
            scale: Scale::InverseSqrtEll,
            zeta: DEFAULT_ZETA,
            seed: 0,
        }
    }

    pub fn gaussian(n: usize, ell: usize) -> Self {
        Self::new(SketchKind::Gaussian, n, ell)
    }

    pub fn srtt(n: usize, ell: usize) -> Self {
        Self::new(SketchKind::Srtt, n, ell)
    }

    pub fn sparse_sign(n: usize, ell: usize, zeta: usize) -> Self {
        SketchSpec {
            zeta,
            ..Self::new(SketchKind::SparseSign, n, ell)
        }
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same distribution, new shape. `zeta` is clamped to `ell`.
    pub fn resized(&self, n: usize, ell: usize) -> Self {
        SketchSpec {
            n,
            ell,
            zeta: self.zeta.min(ell),
            ..*self
        }
    }

    pub fn stream(&self, stream: u64) -> RngStream {
        RngStream::new(self.seed, stream)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.ell > self.n {
            return Err(Error::contract(format!(
                "sketch needs 1 <= ell <= n, got ell={} n={}",
                self.ell, self.n
            )));
        }
        if self.kind == SketchKind::SparseSign && (self.zeta < 2 || self.zeta > self.ell) {
            return Err(Error::contract(format!(
                "sparse sign needs 2 <= zeta <= ell, got zeta={} ell={}",
                self.zeta, self.ell
            )));
        }
        Ok(())
    }

    /// Draws an operator of this distribution from `rng`.
    pub fn draw(&self, rng: &RngStream) -> Result<SketchOperator> {
        draw(self, rng)
    }
}

/// Which product [`apply_sketch`] forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SketchSide {
    /// `A * Omega`
    Right,
    /// `A^T * Gamma`
    TransposedRight,
}

/// A drawn embedding, stored in the form cheapest to apply.
#[derive(Clone, Debug)]
pub enum SketchOperator {
    Dense(DenseMatrix),
    Srtt(SrttOperator),
    SparseSign(SparseSignOperator),
}

impl SketchOperator {
    pub fn rows(&self) -> usize {
        match self {
            SketchOperator::Dense(m) => m.rows(),
            SketchOperator::Srtt(op) => op.rows(),
            SketchOperator::SparseSign(op) => op.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            SketchOperator::Dense(m) => m.cols(),
            SketchOperator::Srtt(op) => op.cols(),
            SketchOperator::SparseSign(op) => op.cols(),
        }
    }

    /// `A * Omega`
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            SketchOperator::Dense(omega) => {
                if a.cols() != omega.rows() {
                    return Err(Error::dims(
                        "sketch apply",
                        format!("operator has {} rows, A has {} cols", omega.rows(), a.cols()),
                    ));
                }
                gemm(a, Op::NoTrans, omega, Op::NoTrans)
            }
            SketchOperator::Srtt(op) => op.apply(a),
            SketchOperator::SparseSign(op) => op.apply(a),
        }
    }

    /// Explicit `n x ell` matrix; for tests and diagnostics.
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            SketchOperator::Dense(m) => m.clone(),
            SketchOperator::Srtt(op) => op
                .apply(&DenseMatrix::identity(op.rows()))
                .expect("identity has matching width"),
            SketchOperator::SparseSign(op) => op.to_dense(),
        }
    }
}

fn check_kind(spec: &SketchSpec, kind: SketchKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::contract(format!(
            "spec is {:?}, expected {:?}",
            spec.kind, kind
        )));
    }
    Ok(())
}

/// Dense Gaussian `n x ell` with variance 1 (`Unit`) or `1/ell`.
pub fn make_gaussian(spec: &SketchSpec, rng: &RngStream) -> Result<DenseMatrix> {
    check_kind(spec, SketchKind::Gaussian)?;
    let std = match spec.scale {
        Scale::Unit => 1.0,
        Scale::InverseSqrtEll => 1.0 / (spec.ell as f64).sqrt(),
    };
    let mut r = rng.rng();
    let data = (0..spec.n * spec.ell)
        .map(|_| std * r.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::from_col_major(spec.n, spec.ell, data)
}

/// SRTT with the `sqrt(n / ell)` isometry scale (times `sqrt(ell)` for
/// `Unit`).
pub fn make_srtt(spec: &SketchSpec, rng: &RngStream) -> Result<SrttOperator> {
    check_kind(spec, SketchKind::Srtt)?;
    let (n, ell) = (spec.n, spec.ell);
    let mut r = rng.rng();
    let input_perm = sample(&mut r, n, n).into_vec();
    let signs = (0..n)
        .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut selected = sample(&mut r, n, ell).into_vec();
    selected.sort_unstable();
    let scale = match spec.scale {
        Scale::InverseSqrtEll => (n as f64 / ell as f64).sqrt(),
        Scale::Unit => (n as f64).sqrt(),
    };
    Ok(SrttOperator {
        n,
        input_perm,
        signs,
        selected,
        scale,
    })
}

/// Sparse sign matrix with exactly `zeta` nonzeros `+-scale` per row at
/// distinct uniformly random columns; `scale = 1/sqrt(zeta)` (times
/// `sqrt(ell)` for `Unit`).
pub fn make_sparse_sign(spec: &SketchSpec, rng: &RngStream) -> Result<SparseSignOperator> {
    check_kind(spec, SketchKind::SparseSign)?;
    let (n, ell, zeta) = (spec.n, spec.ell, spec.zeta);
    let mut r = rng.rng();
    let mut cols = Vec::with_capacity(n * zeta);
    let mut signs = Vec::with_capacity(n * zeta);
    for _ in 0..n {
        for c in sample(&mut r, ell, zeta) {
            cols.push(c);
            signs.push(if r.random::<bool>() { 1.0 } else { -1.0 });
        }
    }
    let scale = match spec.scale {
        Scale::InverseSqrtEll => 1.0 / (zeta as f64).sqrt(),
        Scale::Unit => (ell as f64 / zeta as f64).sqrt(),
    };
    Ok(SparseSignOperator {
        n,
        ell,
        zeta,
        cols,
        signs,
        scale,
    })
}

pub fn draw(spec: &SketchSpec, rng: &RngStream) -> Result<SketchOperator> {
    Ok(match spec.kind {
        SketchKind::Gaussian => SketchOperator::Dense(make_gaussian(spec, rng)?),
        SketchKind::Srtt => SketchOperator::Srtt(make_srtt(spec, rng)?),
        SketchKind::SparseSign => SketchOperator::SparseSign(make_sparse_sign(spec, rng)?),
    })
}

/// `A * Omega` or `A^T * Gamma`.
pub fn apply_sketch(a: &DenseMatrix, op: &SketchOperator, side: SketchSide) -> Result<DenseMatrix> {
    match side {
        SketchSide::Right => op.apply(a),
        SketchSide::TransposedRight => {
            if a.rows() != op.rows() {
                return Err(Error::dims(
                    "sketch apply",
                    format!("operator has {} rows, A has {} rows", op.rows(), a.rows()),
                ));
            }
            match op {
                SketchOperator::Dense(g) => gemm(a, Op::Trans, g, Op::NoTrans),
                _ => op.apply(&a.transpose()),
            }
        }
    }
}

/// Draws `Omega` with `ell` columns for `a` and returns `A * Omega`.
pub fn sketch_columns(a: &DenseMatrix, spec: &SketchSpec, ell: usize, rng: &RngStream) -> Result<DenseMatrix> {
    let op = spec.resized(a.cols(), ell).draw(rng)?;
    op.apply(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_reproducible() {
        let spec = SketchSpec::gaussian(30, 5);
        let rng = RngStream::new(42, 9);
        let a = make_gaussian(&spec, &rng).unwrap();
        let b = make_gaussian(&spec, &rng).unwrap();
        assert_eq!(a, b);
        let c = make_gaussian(&spec, &RngStream::new(42, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SketchSpec::gaussian(3, 4).validate().is_err());
        assert!(SketchSpec::gaussian(3, 0).validate().is_err());
        assert!(SketchSpec::sparse_sign(10, 4, 5).validate().is_err());
        assert!(SketchSpec::sparse_sign(10, 4, 1).validate().is_err());
        assert!(make_srtt(&SketchSpec::gaussian(8, 2), &RngStream::new(0, 0)).is_err());
        assert!(make_srtt(&SketchSpec::srtt(8, 9), &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn resize_clamps_zeta() {
        let s = SketchSpec::sparse_sign(100, 20, 8).resized(100, 4);
        assert_eq!(s.zeta, 4);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn transposed_side_matches_explicit_transpose() {
        let a = DenseMatrix::from_fn(12, 5, |i, j| (i as f64).sin() + j as f64);
        let rng = RngStream::new(3, 1);
        for spec in [
            SketchSpec::gaussian(12, 4),
            SketchSpec::srtt(12, 4),
            SketchSpec::sparse_sign(12, 4, 2),
        ] {
            let op = spec.draw(&rng).unwrap();
            let x = apply_sketch(&a, &op, SketchSide::TransposedRight).unwrap();
            let want = gemm(&a, Op::Trans, &op.to_dense(), Op::NoTrans).unwrap();
            assert!(x.distance(&want).unwrap() < 1e-12);
            assert!(apply_sketch(&a, &op, SketchSide::Right).is_err());
        }
    }

    #[test]
    fn kind_parses() {
        assert_eq!("SRTT".parse::<SketchKind>().unwrap(), SketchKind::Srtt);
        assert_eq!("sparsesign".parse::<SketchKind>().unwrap(), SketchKind::SparseSign);
        assert!("hadamard".parse::<SketchKind>().is_err());
    }
}
