//! File formats: multi-channel input, wideband output and feature matrices.
//!
//! Every binary file has a JSON sidecar at `<path>.sidecar`. Raw files are
//! little-endian IEEE-754 doubles. Channel numbers in files are 1-based.

mod matrix;
mod records;
mod sidecar;
mod wav;
mod wideband;

use std::path::Path;

pub use matrix::{read_matrix, write_matrix, MatrixFormat};
pub use records::{read_multichannel, write_multichannel, RecordFormat};
pub use sidecar::{read_sidecar, sidecar_path, write_sidecar, DataFormat, MatrixHeader, RecordHeader, Sidecar, SidecarHeader};
pub use wav::{read_wav_f32, wav_f32_bytes, write_wav_f32};
pub use wideband::{read_wideband, write_wideband, WidebandFormat};

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn read_f64_le(path: &Path, expected: usize) -> crate::Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(crate::Error::format(
            path,
            format!(
                "{} data: expected {} doubles ({} bytes), found {} bytes",
                if bytes.len() < expected * 8 { "truncated" } else { "oversized" },
                expected,
                expected * 8,
                bytes.len()
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn write_f64_le<'a>(path: &Path, values: impl Iterator<Item = &'a f64>) -> crate::Result<()> {
    let mut bytes = Vec::with_capacity(values.size_hint().0 * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| crate::Error::io(path, e))
}
