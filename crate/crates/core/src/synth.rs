//! Deterministic test signals: sums of cosines and band-masked noise.
//!
//! Noise uses ChaCha8 seeded with `seed_from_u64(seed)`, one stream per
//! channel (`set_stream(channel)`), drawing standard normals.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::features::{folded_frequency, EegBand};
use crate::model::MultiChannelRecord;
use crate::spectrum::{forward_fft, inverse_fft};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub freq_hz: f64,
    pub amplitude: f64,
    /// Radians.
    pub phase: f64,
}

impl Tone {
    pub fn new(freq_hz: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            freq_hz,
            amplitude,
            phase,
        }
    }
}

/// Channel `i` is `sum a cos(2 pi f n / f_s + phase)` over `tones[i]`.
///
/// Channels without an entry in `tones` are silent.
pub fn make_tones(p: usize, n: usize, sample_rate_hz: f64, tones: &[Vec<Tone>]) -> Result<MultiChannelRecord> {
    if tones.len() > p {
        return Err(Error::InvalidConfig(format!(
            "tone table has {} channels, record has {p}",
            tones.len()
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    for tone in tones.iter().flatten() {
        if !(tone.freq_hz.is_finite() && tone.freq_hz >= 0.0 && tone.freq_hz < nyquist) {
            return Err(Error::ToneAboveNyquist {
                freq: tone.freq_hz,
                nyquist,
            });
        }
        if !(tone.amplitude.is_finite() && tone.phase.is_finite()) {
            return Err(Error::InvalidConfig(format!("tone {tone:?} is not finite")));
        }
    }
    let channels = (0..p)
        .map(|c| {
            let list = tones.get(c).map_or(&[][..], Vec::as_slice);
            (0..n)
                .map(|i| {
                    list.iter()
                        .map(|t| t.amplitude * (TAU * t.freq_hz * i as f64 / sample_rate_hz + t.phase).cos())
                        .sum()
                })
                .collect()
        })
        .collect();
    MultiChannelRecord::new(channels, sample_rate_hz)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandNoise {
    pub record: MultiChannelRecord,
    /// The band's upper edge is at or above Nyquist, so only part of it is present.
    pub truncated: bool,
}

/// White Gaussian noise restricted to `band` by zeroing every bin whose
/// folded model-grid frequency lies outside it.
pub fn make_bandnoise(p: usize, n: usize, sample_rate_hz: f64, band: EegBand, seed: u64) -> Result<BandNoise> {
    if p == 0 {
        return Err(Error::NoChannels);
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidRate(sample_rate_hz));
    }
    if n < 2 {
        return Err(Error::TooShort { channel: 0, len: n });
    }
    let nyquist = sample_rate_hz / 2.0;
    let (lo, hi) = band.range_hz();
    if lo >= nyquist {
        return Err(Error::BandAboveNyquist {
            band: band.to_string(),
            nyquist,
        });
    }
    let keep: Vec<bool> = (0..n)
        .map(|k| band.contains(folded_frequency(k, n, sample_rate_hz)))
        .collect();
    if !keep.iter().any(|&b| b) {
        return Err(Error::EmptyBand {
            band: band.to_string(),
        });
    }
    let channels = (0..p)
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut bins = forward_fft(&white, sample_rate_hz)?.into_bins();
            for (z, &k) in bins.iter_mut().zip(&keep) {
                if !k {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
            Ok(inverse_fft(&bins)?.into_iter().map(|z| z.re).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(BandNoise {
        record: MultiChannelRecord::new(channels, sample_rate_hz)?,
        truncated: hi > nyquist,
    })
}
