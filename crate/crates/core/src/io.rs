//! File helpers shared by the pipeline and the CLI.
//!
//! Square matrices are written as CSV with a header row of starting bins:
//!
//! ```text
//! to\from,1,2,...,10
//! 1,0.94,0.05,...
//! ```
//!
//! Row `i`, column `j` holds the probability of moving from bin `j` to bin `i`.
//! Floats use the shortest representation that parses back to the same value.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

pub const MATRIX_CORNER: &str = "to\\from";

pub fn write_square_csv<W: Write>(n: usize, data: &[f64], out: W) -> Result<()> {
    assert_eq!(data.len(), n * n);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![MATRIX_CORNER.to_string()];
    header.extend((1..=n).map(|j| j.to_string()));
    w.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![(i + 1).to_string()];
        row.extend((0..n).map(|j| data[i * n + j].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<matrix>", e))?;
    Ok(())
}

/// Reads a square matrix written by [`write_square_csv`]; returns the size
/// and row-major entries.
pub fn read_square_csv<R: Read>(input: R) -> Result<(usize, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let n = r.headers()?.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::ShapeMismatch("matrix header has no columns".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(Error::ShapeMismatch(format!(
                "matrix row {} has {} entries, expected {}",
                i + 1,
                record.len() - 1,
                n
            )));
        }
        for field in record.iter().skip(1) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: i + 2,
                reason: format!("not a number: {field:?}"),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::ShapeMismatch(format!("matrix has {rows} rows and {n} columns")));
    }
    Ok((n, data))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads one numeric column from a headed CSV. `column` selects by header
/// name; otherwise the column at `default_index` is used.
pub fn read_numeric_column<R: Read>(input: R, column: Option<&str>, default_index: usize) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let idx = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named {name:?}")))?,
        None => default_index,
    };
    let mut out = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let field = record
            .get(idx)
            .ok_or_else(|| Error::InvalidInput(format!("row {} has no column {}", i + 2, idx + 1)))?;
        if field.trim().is_empty() {
            continue;
        }
        let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
            line: i + 2,
            reason: format!("not a number: {field:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_csv_round_trips_exactly() {
        let data: Vec<f64> = (0..9).map(|k| (k as f64 + 0.1) / 7.0).collect();
        let mut buf = Vec::new();
        write_square_csv(3, &data, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("to\\from,1,2,3\n1,"));
        let (n, back) = read_square_csv(buf.as_slice()).unwrap();
        assert_eq!(n, 3);
        assert_eq!(back, data);
    }

    #[test]
    fn rejects_non_square() {
        let text = "to\\from,1,2\n1,0.5,0.5\n";
        assert!(matches!(read_square_csv(text.as_bytes()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn numeric_column_by_name() {
        let text = "year,d,gini\n2000,0.3,0.6\n2001,0.25,\n2002,0.2,0.7\n";
        assert_eq!(
            read_numeric_column(text.as_bytes(), Some("d"), 1).unwrap(),
            [0.3, 0.25, 0.2]
        );
        assert_eq!(
            read_numeric_column(text.as_bytes(), Some("gini"), 1).unwrap(),
            [0.6, 0.7]
        );
        assert!(read_numeric_column(text.as_bytes(), Some("nope"), 1).is_err());
    }
}
