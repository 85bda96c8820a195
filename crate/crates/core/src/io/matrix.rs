use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use super::sidecar::{read_sidecar, write_sidecar, MatrixHeader, Sidecar};
use super::{read_f64_le, write_f64_le};
use crate::error::{Error, Result};
use crate::model::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// `# rows=R cols=C` then `# key=value` metadata lines, then one CSV row per matrix row.
    Csv,
    /// Row-major doubles with a sidecar.
    RawF64,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Self {
        if super::has_extension(path, "csv") {
            MatrixFormat::Csv
        } else {
            MatrixFormat::RawF64
        }
    }
}

pub fn write_matrix(
    matrix: &Array2<f64>,
    path: &Path,
    format: MatrixFormat,
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    if let Some(i) = matrix.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let (rows, cols) = matrix.dim();
    match format {
        MatrixFormat::Csv => {
            let mut out = String::with_capacity(rows * cols * 20 + 64);
            out.push_str(&format!("# rows={rows} cols={cols}\n"));
            for (k, v) in metadata {
                if k.contains(['\n', '=']) || v.contains('\n') {
                    return Err(Error::format(path, format!("metadata entry {k:?} cannot be stored in CSV")));
                }
                out.push_str(&format!("# {k}={v}\n"));
            }
            for row in matrix.rows() {
                let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            std::fs::write(path, out).map_err(|e| Error::io(path, e))
        }
        MatrixFormat::RawF64 => {
            write_f64_le(path, matrix.iter())?;
            write_sidecar(
                path,
                &Sidecar::Matrix(MatrixHeader {
                    format_version: FORMAT_VERSION,
                    rows,
                    cols,
                    metadata: metadata.clone(),
                }),
            )
        }
    }
}

/// Reads a matrix and its metadata.
pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<(Array2<f64>, BTreeMap<String, String>)> {
    match format {
        MatrixFormat::RawF64 => {
            let header = match read_sidecar(path)? {
                Sidecar::Matrix(h) => h,
                _ => return Err(Error::format(path, "sidecar does not describe a matrix")),
            };
            let values = read_f64_le(path, header.rows * header.cols)?;
            let m = Array2::from_shape_vec((header.rows, header.cols), values)
                .map_err(|e| Error::format(path, e.to_string()))?;
            Ok((m, header.metadata))
        }
        MatrixFormat::Csv => read_csv(path),
    }
}

fn read_csv(path: &Path) -> Result<(Array2<f64>, BTreeMap<String, String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dims: Option<(usize, usize)> = None;
    let mut metadata = BTreeMap::new();
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut cols: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let parse_err = |column: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            column,
            message,
        };
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if dims.is_none() && comment.starts_with("rows=") {
                let mut r = None;
                let mut c = None;
                for kv in comment.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("rows", v)) => r = v.parse().ok(),
                        Some(("cols", v)) => c = v.parse().ok(),
                        _ => {}
                    }
                }
                match (r, c) {
                    (Some(r), Some(c)) => dims = Some((r, c)),
                    _ => return Err(parse_err(1, format!("malformed dimension line {line:?}"))),
                }
            } else if let Some((k, v)) = comment.split_once('=') {
                metadata.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for (j, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            values.push(
                cell.parse::<f64>()
                    .map_err(|_| parse_err(j + 1, format!("non-numeric cell {cell:?}")))?,
            );
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(width.min(c) + 1, format!("row has {width} cells, expected {c}")));
            }
            _ => {}
        }
        rows += 1;
    }
    let (r, c) = dims.ok_or_else(|| Error::format(path, "missing '# rows=R cols=C' line"))?;
    if r != rows || (rows > 0 && cols != Some(c)) {
        return Err(Error::format(
            path,
            format!("header declares {r}x{c}, data has {rows}x{}", cols.unwrap_or(0)),
        ));
    }
    let m = Array2::from_shape_vec((r, c), values).map_err(|e| Error::format(path, e.to_string()))?;
    Ok((m, metadata))
}
