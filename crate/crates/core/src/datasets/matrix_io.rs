//! Binary matrix interchange format and label files.
//!
//! A matrix file is a 24 byte header followed by the entries in column-major
//! order as little-endian `f64`:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "LRSM"
//!      4     1  element type (1 = f64 little-endian)
//!      5     3  reserved, zero
//!      8     8  rows, u64 little-endian
//!     16     8  cols, u64 little-endian
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{LrscError, Result};

pub const MATRIX_MAGIC: &[u8; 4] = b"LRSM";
const ELEMENT_F64_LE: u8 = 1;

pub fn encode_matrix<W: Write>(m: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    out.write_all(MATRIX_MAGIC)?;
    out.write_all(&[ELEMENT_F64_LE, 0, 0, 0])?;
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    out.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for v in m.iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn decode_matrix<R: Read>(mut input: R, path: &Path) -> Result<DMatrix<f64>> {
    let mut header = [0u8; 24];
    input
        .read_exact(&mut header)
        .map_err(|_| LrscError::format(path, "truncated matrix header"))?;
    if &header[0..4] != MATRIX_MAGIC {
        return Err(LrscError::format(path, "bad magic, not a matrix file"));
    }
    if header[4] != ELEMENT_F64_LE {
        return Err(LrscError::format(path, format!("unsupported element type {}", header[4])));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| LrscError::format(path, "matrix size overflows"))?;
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| LrscError::io(path, e))?;
    if bytes.len() != len * 8 {
        return Err(LrscError::format(
            path,
            format!("expected {} data bytes for {rows}x{cols}, found {}", len * 8, bytes.len()),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DMatrix::from_vec(rows, cols, data))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LrscError::io(path, e))?;
    encode_matrix(m, BufWriter::new(file)).map_err(|e| LrscError::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LrscError::io(path, e))?;
    decode_matrix(BufReader::new(file), path)
}

/// Labels as `sample,label` CSV, one row per column of the data matrix.
pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LrscError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "sample,label")?;
        for (i, l) in labels.iter().enumerate() {
            writeln!(out, "{i},{l}")?;
        }
        out.flush()
    };
    write().map_err(|e| LrscError::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LrscError::io(path, e))?;
    let mut labels = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| LrscError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("sample")) {
            continue;
        }
        let label = line
            .rsplit(',')
            .next()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| LrscError::format(path, format!("bad label on line {}", lineno + 1)))?;
        labels.push(label);
    }
    Ok(labels)
}
