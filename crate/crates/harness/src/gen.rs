//! Materializes a matrix recipe to a file.

use std::path::Path;

use anyhow::{bail, Result};
use skelid::dense::DenseMatrix;
use skelid::zoo::{write_csv_matrix, write_matrix_market, write_raw_f64};

/// Writes `a` in the format named by `format`, or guessed from the
/// extension of `path` (`.csv`, `.mtx`, `.bin`/`.raw`).
pub fn write_matrix(a: &DenseMatrix, path: &Path, format: Option<&str>) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let fmt = format.unwrap_or(ext).to_ascii_lowercase();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    match fmt.as_str() {
        "csv" => write_csv_matrix(path, a)?,
        "mtx" | "matrixmarket" => write_matrix_market(path, a)?,
        "raw" | "bin" => write_raw_f64(path, a)?,
        other => bail!("cannot write format '{other}' (csv, mtx, raw)"),
    }
    Ok(())
}
