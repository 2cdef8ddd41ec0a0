//! Matrix interchange formats.
//!
//! JSON: `{"dim": n, "entries": [[re, im], ...]}` in row-major order.
//!
//! Binary: a 16-byte header followed by `dim * dim` little-endian `(re, im)`
//! pairs of `f64`, row-major. Header layout:
//!
//! | bytes  | content                |
//! |--------|------------------------|
//! | 0..4   | magic `NCGM`           |
//! | 4..8   | `u32` dim              |
//! | 8..12  | `u32` format version 1 |
//! | 12..16 | reserved, zero         |
//!
//! [`read_matrix`] sniffs the magic and accepts either format.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const BINARY_MAGIC: &[u8; 4] = b"NCGM";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

pub fn to_json_string(m: &ComplexMatrix) -> String {
    let doc = MatrixJson {
        dim: m.dim(),
        entries: m.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&doc).expect("matrix serialization cannot fail")
}

pub fn from_json_str(s: &str) -> Result<ComplexMatrix> {
    let doc: MatrixJson =
        serde_json::from_str(s).map_err(|e| Error::Format(format!("json: {e}")))?;
    let entries: Vec<Complex64> = doc.entries.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    ComplexMatrix::from_row_major(doc.dim, &entries).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_binary(m: &ComplexMatrix) -> Vec<u8> {
    let n = m.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * n * n);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for z in m.to_row_major() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<ComplexMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != BINARY_MAGIC {
        return Err(Error::Format("missing NCGM header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let dim = word(4) as usize;
    let version = word(8);
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported binary version {version}")));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * dim * dim {
        return Err(Error::Format(format!(
            "expected {} payload bytes for dim {dim}, found {}",
            16 * dim * dim,
            body.len()
        )));
    }
    let entries: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::from_row_major(dim, &entries).map_err(|e| Error::Format(e.to_string()))
}

/// Decodes either format from raw bytes.
pub fn decode(bytes: &[u8]) -> Result<ComplexMatrix> {
    if bytes.starts_with(BINARY_MAGIC) {
        from_binary(bytes)
    } else {
        let s = std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("utf-8: {e}")))?;
        from_json_str(s)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Json,
    Binary,
}

pub fn write_matrix(path: impl AsRef<Path>, m: &ComplexMatrix, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        MatrixFormat::Json => to_json_string(m).into_bytes(),
        MatrixFormat::Binary => to_binary(m),
    };
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}
