//! CSV matrices and atomic file output.
//!
//! A matrix file has one header line `d=<columns>,<name_1>,...,<name_d>`
//! followed by one line per row: the row index, then the values in
//! scientific notation with 17 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pixels::PixelMatrix;

/// Column names `c0, c1, ...`.
pub fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("c{i}")).collect()
}

pub fn write_matrix<W: Write>(out: W, m: &PixelMatrix, names: &[String]) -> Result<()> {
    if names.len() != m.dim() {
        return Err(Error::contract(format!(
            "{} column names for {} columns",
            names.len(),
            m.dim()
        )));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec![format!("d={}", m.dim())];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (i, row) in m.rows().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn matrix_to_string(m: &PixelMatrix, names: &[String]) -> Result<String> {
    let mut buf = Vec::new();
    write_matrix(&mut buf, m, names)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Parse a matrix file, returning the matrix and its column names.
pub fn read_matrix<R: Read>(input: R) -> Result<(PixelMatrix, Vec<String>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::contract("matrix file is empty"))??;
    let d: usize = header
        .get(0)
        .and_then(|h| h.strip_prefix("d="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::contract("matrix header must start with d=<columns>"))?;
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.len() != d {
        return Err(Error::contract(format!("header declares d={d} but names {} columns", names.len())));
    }
    let mut m = PixelMatrix::empty(d)?;
    let mut row = Vec::with_capacity(d);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != d + 1 {
            return Err(Error::contract(format!("row {i} has {} fields, expected {}", rec.len(), d + 1)));
        }
        row.clear();
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::contract(format!("row {i}: cannot parse {field:?} as a number")))?;
            row.push(v);
        }
        m.push_row(&row)?;
    }
    Ok((m, names))
}

pub fn read_matrix_file(path: &Path) -> Result<(PixelMatrix, Vec<String>)> {
    read_matrix(std::fs::File::open(path)?)
}

/// Write `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
