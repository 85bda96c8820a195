use std::path::Path;

use rustfft::num_complex::Complex64;

use super::sidecar::{read_sidecar, write_sidecar, DataFormat, Sidecar, SidecarHeader};
use super::wav::{read_wav_f32, write_wav_f32};
use super::{read_f64_le, write_f64_le};
use crate::error::{Error, Result};
use crate::model::{Samples, WidebandSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidebandFormat {
    /// Playable mono float WAV; real-output modes only.
    WavF32,
    /// Lossless doubles; complex signals are stored as two planes.
    RawF64,
}

impl WidebandFormat {
    /// `.wav` selects WAV, anything else raw doubles.
    pub fn from_path(path: &Path) -> Self {
        if super::has_extension(path, "wav") {
            WidebandFormat::WavF32
        } else {
            WidebandFormat::RawF64
        }
    }
}

/// Writes the samples and the mandatory sidecar.
pub fn write_wideband(signal: &WidebandSignal, path: &Path, format: WidebandFormat) -> Result<()> {
    let data_format = match format {
        WidebandFormat::WavF32 => {
            let Samples::Real(samples) = &signal.samples else {
                return Err(Error::ComplexNotPlayable);
            };
            let rate = signal.rate_hz.round();
            if !(1.0..=u32::MAX as f64).contains(&rate) {
                return Err(Error::format(path, format!("rate {} Hz cannot be stored in a WAV header", signal.rate_hz)));
            }
            let narrow: Vec<f32> = samples.iter().map(|&x| x as f32).collect();
            write_wav_f32(path, &narrow, rate as u32)?;
            DataFormat::WavF32
        }
        WidebandFormat::RawF64 => {
            match &signal.samples {
                Samples::Real(v) => write_f64_le(path, v.iter())?,
                Samples::Complex(v) => {
                    let re = v.iter().map(|z| &z.re);
                    let im = v.iter().map(|z| &z.im);
                    write_f64_le(path, re.chain(im))?
                }
            }
            DataFormat::RawF64
        }
    };
    let header = SidecarHeader::from_provenance(&signal.provenance, data_format, signal.len());
    write_sidecar(path, &Sidecar::Wideband(header))
}

/// Reads a wideband signal and its provenance from `path` + sidecar.
pub fn read_wideband(path: &Path) -> Result<WidebandSignal> {
    let header = match read_sidecar(path)? {
        Sidecar::Wideband(h) => h,
        _ => return Err(Error::format(path, "sidecar does not describe a wideband signal")),
    };
    let provenance = header.to_provenance()?;
    let n = header.wideband_samples;
    let mut quantization = 0.0;
    let samples = match header.data_format {
        DataFormat::WavF32 => {
            let (samples, rate) = read_wav_f32(path)?;
            if f64::from(rate) != header.target_rate_hz.round() {
                return Err(Error::format(
                    path,
                    format!("WAV rate {rate} Hz disagrees with sidecar rate {} Hz", header.target_rate_hz),
                ));
            }
            if samples.len() != n {
                return Err(Error::format(
                    path,
                    format!("WAV holds {} samples, sidecar expects {n}", samples.len()),
                ));
            }
            if header.planes != 1 {
                return Err(Error::format(path, "WAV data cannot hold a complex signal"));
            }
            quantization = f64::from(f32::EPSILON) / 2.0;
            Samples::Real(samples.into_iter().map(f64::from).collect())
        }
        DataFormat::RawF64 => {
            let values = read_f64_le(path, n * header.planes)?;
            if header.planes == 1 {
                Samples::Real(values)
            } else {
                let (re, im) = values.split_at(n);
                Samples::Complex(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
            }
        }
    };
    Ok(WidebandSignal {
        samples,
        rate_hz: header.target_rate_hz,
        provenance,
        quantization,
    })
}
