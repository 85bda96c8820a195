//! Mono IEEE-float-32 RIFF/WAVE.
//!
//! Written with a plain 16-byte `fmt ` chunk (format tag 3); read with
//! `hound`, which also accepts the extensible variant.

use std::path::Path;

use crate::error::{Error, Result};

const FORMAT_IEEE_FLOAT: u16 = 3;

/// Complete file image: 44-byte header followed by little-endian f32 samples.
pub fn wav_f32_bytes(samples: &[f32], sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 4) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 4);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_IEEE_FLOAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 4).to_le_bytes()); // byte rate
    out.extend_from_slice(&4u16.to_le_bytes()); // block align
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav_f32(path: &Path, samples: &[f32], sample_rate: u32) -> Result<()> {
    if samples.len() > (u32::MAX as usize - 36) / 4 {
        return Err(Error::format(path, "signal too long for a RIFF file"));
    }
    std::fs::write(path, wav_f32_bytes(samples, sample_rate)).map_err(|e| Error::io(path, e))
}

/// Reads a mono 32-bit float WAV, returning samples and sample rate.
pub fn read_wav_f32(path: &Path) -> Result<(Vec<f32>, u32)> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) if io.kind() != std::io::ErrorKind::UnexpectedEof => Error::io(path, io),
        other => Error::format(path, format!("invalid WAV: {other}")),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 32 || spec.sample_format != hound::SampleFormat::Float {
        return Err(Error::format(
            path,
            format!(
                "expected mono 32-bit float WAV, found {} channel(s), {} bits, {:?}",
                spec.channels, spec.bits_per_sample, spec.sample_format
            ),
        ));
    }
    let samples = reader
        .into_samples::<f32>()
        .collect::<std::result::Result<Vec<f32>, _>>()
        .map_err(|e| Error::format(path, format!("truncated or corrupt WAV data: {e}")))?;
    Ok((samples, spec.sample_rate))
}
