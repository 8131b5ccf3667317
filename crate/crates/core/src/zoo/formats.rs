//! Matrix Market, IDX, raw float64 and CSV input/output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::skeleton::ErrorTrace;

/// First line of every CSV file written here; bumped on schema changes.
pub const CSV_SCHEMA: &str = "# skelid-csv v1";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn parse_err(structure: &'static str, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        structure,
        offset: offset as u64,
        message: message.into(),
    }
}

/// Lines with their starting byte offsets.
fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |line| {
        let start = offset;
        offset += line.len();
        (start, line.trim_end_matches(['\n', '\r']))
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a real or integer Matrix Market file (coordinate or array;
/// general, symmetric or skew-symmetric) into a dense matrix.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let bytes = read_bytes(path.as_ref())?;
    parse_matrix_market(&bytes)
}

pub fn parse_matrix_market(bytes: &[u8]) -> Result<DenseMatrix> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        parse_err("Matrix Market text", e.valid_up_to(), "file is not valid UTF-8")
    })?;
    let mut lines = lines_with_offsets(text);

    let (off, banner) = lines
        .next()
        .ok_or_else(|| parse_err("Matrix Market header", 0, "empty file"))?;
    let tokens: Vec<String> = banner.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            "Matrix Market header",
            off,
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err("Matrix Market header", off, format!("unsupported format '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err("Matrix Market header", off, format!("unsupported field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        other => {
            return Err(parse_err("Matrix Market header", off, format!("unsupported symmetry '{other}'")))
        }
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let (off, size_line) = data
        .next()
        .ok_or_else(|| parse_err("Matrix Market size line", text.len(), "missing size line"))?;
    let sizes = parse_usizes(size_line, "Matrix Market size line", off)?;
    let expected = if coordinate { 3 } else { 2 };
    if sizes.len() != expected {
        return Err(parse_err(
            "Matrix Market size line",
            off,
            format!("expected {expected} integers, found {}", sizes.len()),
        ));
    }
    let (m, n) = (sizes[0], sizes[1]);
    if symmetry != MmSymmetry::General && m != n {
        return Err(parse_err("Matrix Market size line", off, "symmetric matrix must be square"));
    }
    let mut a = DenseMatrix::zeros(m, n);

    if coordinate {
        let nnz = sizes[2];
        for e in 0..nnz {
            let (off, line) = data.next().ok_or_else(|| {
                parse_err(
                    "Matrix Market entry",
                    text.len(),
                    format!("file truncated: {e} of {nnz} entries present"),
                )
            })?;
            let mut it = line.split_whitespace();
            let (Some(i), Some(j), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(parse_err("Matrix Market entry", off, "expected 'row col value'"));
            };
            let i = parse_index(i, m, off)?;
            let j = parse_index(j, n, off)?;
            let v = parse_value(v, off)?;
            a.as_mut_slice()[i + j * m] = v;
            if i != j {
                match symmetry {
                    MmSymmetry::General => {}
                    MmSymmetry::Symmetric => a.as_mut_slice()[j + i * m] = v,
                    MmSymmetry::SkewSymmetric => a.as_mut_slice()[j + i * m] = -v,
                }
            }
        }
    } else {
        // column-major; symmetric variants list the lower triangle only
        let positions: Vec<(usize, usize)> = match symmetry {
            MmSymmetry::General => (0..n).flat_map(|j| (0..m).map(move |i| (i, j))).collect(),
            MmSymmetry::Symmetric => (0..n).flat_map(|j| (j..m).map(move |i| (i, j))).collect(),
            MmSymmetry::SkewSymmetric => (0..n).flat_map(|j| (j + 1..m).map(move |i| (i, j))).collect(),
        };
        let total = positions.len();
        for (e, (i, j)) in positions.into_iter().enumerate() {
            let (off, line) = data.next().ok_or_else(|| {
                parse_err(
                    "Matrix Market entry",
                    text.len(),
                    format!("file truncated: {e} of {total} values present"),
                )
            })?;
            let v = parse_value(line.trim(), off)?;
            a.as_mut_slice()[i + j * m] = v;
            match symmetry {
                MmSymmetry::General => {}
                MmSymmetry::Symmetric => a.as_mut_slice()[j + i * m] = v,
                MmSymmetry::SkewSymmetric => a.as_mut_slice()[j + i * m] = -v,
            }
        }
    }
    if let Some((off, _)) = data.next() {
        return Err(parse_err("Matrix Market entry", off, "more entries than declared"));
    }
    Ok(a)
}

/// Writes a dense Matrix Market file (`array real general`).
pub fn write_matrix_market(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io)?;
    writeln!(w, "{} {}", a.rows(), a.cols()).map_err(io)?;
    for v in a.as_slice() {
        writeln!(w, "{}", fmt_f64(*v)).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn parse_usizes(line: &str, structure: &'static str, off: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(structure, off, format!("'{t}' is not a nonnegative integer")))
        })
        .collect()
}

fn parse_index(tok: &str, bound: usize, off: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(i) if i >= 1 && i <= bound => Ok(i - 1),
        _ => Err(parse_err(
            "Matrix Market entry",
            off,
            format!("index '{tok}' outside 1..={bound}"),
        )),
    }
}

fn parse_value(tok: &str, off: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err("Matrix Market entry", off, format!("'{tok}' is not a finite number"))),
    }
}

/// Reads an IDX unsigned-byte image file (magic `0x00000803`) into a
/// `count x (rows * cols)` matrix, one flattened image per row, with
/// pixels scaled to `[0, 1]`.
pub fn read_idx_images(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_idx_images(&read_bytes(path.as_ref())?)
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 16 {
        return Err(parse_err("IDX header", bytes.len(), "file truncated inside the 16-byte header"));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    if word(0) != 0x0803 {
        return Err(parse_err(
            "IDX header",
            0,
            format!("magic 0x{:08x}, expected 0x00000803", word(0)),
        ));
    }
    let (count, rows, cols) = (word(1), word(2), word(3));
    let pixels = rows * cols;
    let need = count
        .checked_mul(pixels)
        .ok_or_else(|| parse_err("IDX header", 4, "image dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() < need {
        return Err(parse_err(
            "IDX pixel data",
            bytes.len(),
            format!("file truncated: {} of {need} pixel bytes present", payload.len()),
        ));
    }
    Ok(DenseMatrix::from_fn(count, pixels, |i, j| {
        payload[i * pixels + j] as f64 / 255.0
    }))
}

/// Reads `m * n` little-endian float64 values in column-major order.
pub fn read_raw_f64(path: impl AsRef<Path>, m: usize, n: usize) -> Result<DenseMatrix> {
    let bytes = read_bytes(path.as_ref())?;
    if bytes.len() % 8 != 0 {
        return Err(parse_err(
            "raw f64 payload",
            bytes.len() - bytes.len() % 8,
            "file ends inside a value",
        ));
    }
    if bytes.len() != m * n * 8 {
        return Err(Error::contract(format!(
            "raw f64 payload holds {} values, {m}x{n} needs {}",
            bytes.len() / 8,
            m * n
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_col_major(m, n, data)
}

pub fn write_raw_f64(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for v in a.as_slice() {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV writer whose first line is [`CSV_SCHEMA`] followed by `tag`.
pub fn csv_writer(path: impl AsRef<Path>, tag: &str) -> Result<csv::Writer<File>> {
    let path = path.as_ref();
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{CSV_SCHEMA} {tag}").map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            structure: "CSV record",
            offset: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Matrix as CSV: header `c0,c1,..`, one row per matrix row.
pub fn write_csv_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path, "matrix")?;
    let header: Vec<String> = (0..a.cols()).map(|j| format!("c{j}")).collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..a.rows() {
        w.write_record(a.row(i).into_iter().map(fmt_f64)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Error trace as CSV with columns `k,eSchur,estNormUr,estMaxUr`; absent
/// estimates are left empty.
pub fn write_csv_trace(path: impl AsRef<Path>, trace: &ErrorTrace) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path, "trace")?;
    w.write_record(["k", "eSchur", "estNormUr", "estMaxUr"]).map_err(|e| csv_err(path, e))?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in &trace.records {
        w.write_record([r.k.to_string(), fmt_f64(r.e_schur), opt(r.est_norm), opt(r.est_max)])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a numeric CSV matrix; `#` lines are comments and the first
/// record is taken as a header when it is not numeric.
pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some(first) = rows.first() {
                    if first.len() != v.len() {
                        return Err(Error::Parse {
                            structure: "CSV record",
                            offset,
                            message: format!("expected {} fields, found {}", first.len(), v.len()),
                        });
                    }
                }
                rows.push(v);
            }
            Err(_) if idx == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    structure: "CSV record",
                    offset,
                    message: "non-numeric field".into(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    Ok(DenseMatrix::from_rows(&rows))
}
