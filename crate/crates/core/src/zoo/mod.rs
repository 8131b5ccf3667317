//! Test matrices and matrix files.

mod formats;
mod generators;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sketch::RngStream;

pub use formats::{
    csv_writer, fmt_f64, parse_idx_images, parse_matrix_market, read_csv_matrix, read_idx_images,
    read_matrix_market, read_raw_f64, write_csv_matrix, write_csv_trace, write_matrix_market, write_raw_f64, CSV_SCHEMA,
};
pub use generators::{
    fast_decay_spectrum, gen_chan, gen_chan_lower, gen_exact_rank, gen_fast_decay, gen_gaussian, gen_kahan,
    haar_columns, Generated,
};

pub const DEFAULT_BETA: f64 = 1e-16;
pub const DEFAULT_KAHAN_ZETA: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    MatrixMarket,
    Idx,
    Raw { rows: usize, cols: usize },
    Csv,
}

impl FileFormat {
    /// Guess from the extension; raw files need an explicit shape.
    pub fn detect(path: &Path) -> Option<FileFormat> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        if name.ends_with(".mtx") {
            Some(FileFormat::MatrixMarket)
        } else if name.ends_with(".csv") {
            Some(FileFormat::Csv)
        } else if name.contains("idx3") || name.ends_with(".idx") {
            Some(FileFormat::Idx)
        } else {
            None
        }
    }
}

/// Where a matrix comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixRecipe {
    FastDecay { m: usize, n: usize, beta: f64 },
    Kahan { n: usize, zeta: f64 },
    Chan { n: usize },
    ExactRank { m: usize, n: usize, rank: usize },
    Gaussian { m: usize, n: usize },
    FromFile { path: PathBuf, format: FileFormat },
}

impl MatrixRecipe {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::contract(msg));
        match *self {
            MatrixRecipe::FastDecay { m, n, beta } => {
                if m < n || n == 0 {
                    return bad(format!("fast decay needs m >= n >= 1, got {m}x{n}"));
                }
                if !(beta > 0.0 && beta <= 1.0) {
                    return bad(format!("fast decay needs 0 < beta <= 1, got {beta}"));
                }
            }
            MatrixRecipe::Kahan { n, zeta } => {
                if n == 0 || !(zeta > 0.0 && zeta < 1.0) {
                    return bad(format!("Kahan needs n >= 1 and 0 < zeta < 1, got n={n} zeta={zeta}"));
                }
            }
            MatrixRecipe::Chan { n } => {
                if n == 0 {
                    return bad("Chan needs n >= 1".into());
                }
            }
            MatrixRecipe::ExactRank { m, n, rank } => {
                if rank > m.min(n) {
                    return bad(format!("rank {rank} exceeds min({m}, {n})"));
                }
            }
            MatrixRecipe::Gaussian { .. } | MatrixRecipe::FromFile { .. } => {}
        }
        Ok(())
    }

    /// Materializes the matrix; singular values are returned when known
    /// in closed form.
    pub fn build(&self, rng: &RngStream) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
        self.validate()?;
        Ok(match self {
            MatrixRecipe::FastDecay { m, n, beta } => {
                let g = gen_fast_decay(*m, *n, *beta, rng)?;
                (g.a, Some(g.sigma))
            }
            MatrixRecipe::Kahan { n, zeta } => (gen_kahan(*n, *zeta)?, None),
            MatrixRecipe::Chan { n } => (gen_chan(*n), None),
            MatrixRecipe::ExactRank { m, n, rank } => (gen_exact_rank(*m, *n, *rank, rng)?, None),
            MatrixRecipe::Gaussian { m, n } => (gen_gaussian(*m, *n, rng), None),
            MatrixRecipe::FromFile { path, format } => (load_matrix(path, *format)?, None),
        })
    }
}

fn parse_shape(s: &str) -> Option<(usize, usize)> {
    match s.split_once('x') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => {
            let n = s.parse().ok()?;
            Some((n, n))
        }
    }
}

impl FromStr for MatrixRecipe {
    type Err = Error;

    /// `fastdecay:N[xM][:beta]`, `kahan:N[:zeta]`, `chan:N`,
    /// `lowrank:MxN:R`, `gaussian:MxN`; any other string is a file path
    /// whose format is guessed from the extension.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let usage = || Error::contract(format!("cannot parse matrix recipe '{s}'"));
        let shape = |i: usize| parts.get(i).and_then(|p| parse_shape(p)).ok_or_else(usage);
        let real = |i: usize, default: f64| match parts.get(i) {
            Some(p) => p.parse::<f64>().map_err(|_| usage()),
            None => Ok(default),
        };
        let recipe = match parts[0].to_ascii_lowercase().as_str() {
            "fastdecay" => {
                let (m, n) = shape(1)?;
                MatrixRecipe::FastDecay {
                    m,
                    n,
                    beta: real(2, DEFAULT_BETA)?,
                }
            }
            "kahan" => {
                let (m, n) = shape(1)?;
                if m != n {
                    return Err(usage());
                }
                MatrixRecipe::Kahan {
                    n,
                    zeta: real(2, DEFAULT_KAHAN_ZETA)?,
                }
            }
            "chan" => {
                let (m, n) = shape(1)?;
                if m != n {
                    return Err(usage());
                }
                MatrixRecipe::Chan { n }
            }
            "lowrank" => {
                let (m, n) = shape(1)?;
                let rank = parts.get(2).and_then(|p| p.parse().ok()).ok_or_else(usage)?;
                MatrixRecipe::ExactRank { m, n, rank }
            }
            "gaussian" => {
                let (m, n) = shape(1)?;
                MatrixRecipe::Gaussian { m, n }
            }
            _ => {
                let path = PathBuf::from(s);
                let format = FileFormat::detect(&path).ok_or_else(|| {
                    Error::contract(format!("cannot infer the format of '{s}'; pass it explicitly"))
                })?;
                MatrixRecipe::FromFile { path, format }
            }
        };
        recipe.validate()?;
        Ok(recipe)
    }
}

pub fn load_matrix(path: &Path, format: FileFormat) -> Result<DenseMatrix> {
    match format {
        FileFormat::MatrixMarket => read_matrix_market(path),
        FileFormat::Idx => read_idx_images(path),
        FileFormat::Raw { rows, cols } => read_raw_f64(path, rows, cols),
        FileFormat::Csv => read_csv_matrix(path),
    }
}
