//! Spectrogram extraction and per-band energy summaries.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{source_bin_frequency, MultiChannelRecord, Samples, WidebandSignal};
use crate::spectrum::forward_fft;

/// EEG frequency bands. Ranges are half-open `[lo, hi)`; sigma and beta overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EegBand {
    Delta,
    Theta,
    Alpha,
    Sigma,
    Beta,
    Gamma,
}

impl EegBand {
    pub const ALL: [EegBand; 6] = [
        EegBand::Delta,
        EegBand::Theta,
        EegBand::Alpha,
        EegBand::Sigma,
        EegBand::Beta,
        EegBand::Gamma,
    ];

    /// `(lo, hi)` in Hz.
    pub fn range_hz(self) -> (f64, f64) {
        match self {
            EegBand::Delta => (0.5, 4.0),
            EegBand::Theta => (4.0, 8.0),
            EegBand::Alpha => (8.0, 12.0),
            EegBand::Sigma => (12.0, 16.0),
            EegBand::Beta => (12.0, 30.0),
            EegBand::Gamma => (30.0, 100.0),
        }
    }

    pub fn contains(self, freq_hz: f64) -> bool {
        let (lo, hi) = self.range_hz();
        lo <= freq_hz && freq_hz < hi
    }

    pub fn name(self) -> &'static str {
        match self {
            EegBand::Delta => "delta",
            EegBand::Theta => "theta",
            EegBand::Alpha => "alpha",
            EegBand::Sigma => "sigma",
            EegBand::Beta => "beta",
            EegBand::Gamma => "gamma",
        }
    }
}

impl fmt::Display for EegBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EegBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        EegBand::ALL
            .into_iter()
            .find(|b| b.name() == lower)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown band {s:?}, expected one of delta, theta, alpha, sigma, beta, gamma"
                ))
            })
    }
}

/// Frequency of bin `k` on the model grid `k * f_s/(N-1)`, with bins above
/// `N/2` folded onto their conjugate partner `N - k`.
pub fn folded_frequency(k: usize, n: usize, sample_rate_hz: f64) -> f64 {
    source_bin_frequency(k.min(n - k), n, sample_rate_hz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnitudeScale {
    #[default]
    Linear,
    /// `20 log10(max(|X|, 1e-10))`.
    Decibel,
}

const DB_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrogramOptions {
    pub window: usize,
    pub overlap: usize,
    /// Drop the final frame, giving `floor((N' - window)/hop)` frames.
    pub paper_shape: bool,
    pub scale: MagnitudeScale,
}

impl SpectrogramOptions {
    pub fn new(window: usize, overlap: usize) -> Self {
        Self {
            window,
            overlap,
            paper_shape: false,
            scale: MagnitudeScale::Linear,
        }
    }

    pub fn hop(&self) -> usize {
        self.window - self.overlap
    }

    pub fn rows(&self) -> usize {
        self.window / 2 + 1
    }

    fn check(&self, len: usize) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidWindow("window must be at least 1 sample".into()));
        }
        if self.overlap >= self.window {
            return Err(Error::InvalidWindow(format!(
                "overlap {} must be smaller than window {}",
                self.overlap, self.window
            )));
        }
        if self.window > len {
            return Err(Error::WindowTooLong {
                window: self.window,
                len,
            });
        }
        Ok(())
    }

    /// Number of frames for a signal of `len` samples.
    pub fn frames(&self, len: usize) -> Result<usize> {
        self.check(len)?;
        let natural = 1 + (len - self.window) / self.hop();
        Ok(if self.paper_shape && natural > 1 { natural - 1 } else { natural })
    }

    /// Settings recorded alongside an exported matrix.
    pub fn metadata(&self, rate_hz: f64) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("kind".into(), "spectrogram".into());
        m.insert("window".into(), "hann-periodic".into());
        m.insert("window_samples".into(), self.window.to_string());
        m.insert("overlap_samples".into(), self.overlap.to_string());
        m.insert("hop_samples".into(), self.hop().to_string());
        m.insert("paper_shape".into(), self.paper_shape.to_string());
        m.insert(
            "scale".into(),
            match self.scale {
                MagnitudeScale::Linear => "magnitude".into(),
                MagnitudeScale::Decibel => format!("db-magnitude floor={DB_FLOOR:e}"),
            },
        );
        m.insert("rate_hz".into(), rate_hz.to_string());
        m.insert("bin_hz".into(), (rate_hz / self.window as f64).to_string());
        m
    }
}

/// Periodic Hann window, `0.5 - 0.5 cos(2 pi n / W)`.
pub fn hann(window: usize) -> Vec<f64> {
    (0..window)
        .map(|n| 0.5 - 0.5 * (TAU * n as f64 / window as f64).cos())
        .collect()
}

/// Magnitude STFT of a real wideband signal, shaped `(window/2 + 1) x frames`.
pub fn spectrogram(signal: &WidebandSignal, options: &SpectrogramOptions) -> Result<Array2<f64>> {
    match &signal.samples {
        Samples::Real(x) => spectrogram_samples(x, options),
        Samples::Complex(_) => Err(Error::ComplexSignal),
    }
}

pub fn spectrogram_samples(samples: &[f64], options: &SpectrogramOptions) -> Result<Array2<f64>> {
    let frames = options.frames(samples.len())?;
    if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let rows = options.rows();
    let hop = options.hop();
    let w = hann(options.window);
    let fft = rustfft::FftPlanner::<f64>::new().plan_fft_forward(options.window);
    let columns: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map(|t| {
            let start = t * hop;
            let frame = &samples[start..start + options.window];
            frame_magnitudes(frame, &w, fft.as_ref(), rows, options.scale)
        })
        .collect();
    let mut out = Array2::zeros((rows, frames));
    for (t, col) in columns.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            out[[r, t]] = v;
        }
    }
    Ok(out)
}

fn frame_magnitudes(
    frame: &[f64],
    w: &[f64],
    fft: &dyn rustfft::Fft<f64>,
    rows: usize,
    scale: MagnitudeScale,
) -> Vec<f64> {
    let mut buf: Vec<Complex64> = frame
        .iter()
        .zip(w)
        .map(|(&x, &h)| Complex64::new(x * h, 0.0))
        .collect();
    fft.process(&mut buf);
    buf[..rows]
        .iter()
        .map(|z| match scale {
            MagnitudeScale::Linear => z.norm(),
            MagnitudeScale::Decibel => 20.0 * z.norm().max(DB_FLOOR).log10(),
        })
        .collect()
}

/// Band energies of one channel, `sum |X[k]|^2` over the bins of each band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEnergies {
    /// `None` for bands whose lower edge is at or above Nyquist.
    pub bands: BTreeMap<EegBand, Option<f64>>,
    /// All bins; equals `N * sum x^2`.
    pub total: f64,
}

impl BandEnergies {
    pub fn get(&self, band: EegBand) -> Option<f64> {
        self.bands.get(&band).copied().flatten()
    }

    /// Share of the total energy in `band`; 0 for a silent channel.
    pub fn fraction(&self, band: EegBand) -> Option<f64> {
        let e = self.get(band)?;
        Some(if self.total > 0.0 { e / self.total } else { 0.0 })
    }

    /// Band with the most energy, if any band has nonzero energy.
    pub fn dominant(&self) -> Option<EegBand> {
        self.bands
            .iter()
            .filter_map(|(&b, &e)| e.filter(|&e| e > 0.0).map(|e| (b, e)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(b, _)| b)
    }
}

/// Per-channel energy in each EEG band.
pub fn band_energies(record: &MultiChannelRecord) -> Result<Vec<BandEnergies>> {
    let n = record.len();
    let rate = record.sample_rate_hz();
    let nyquist = rate / 2.0;
    record
        .channels()
        .par_iter()
        .map(|channel| {
            let spectrum = forward_fft(channel, rate)?;
            let power: Vec<f64> = spectrum.bins().iter().map(|z| z.norm_sqr()).collect();
            let total = power.iter().sum();
            let bands = EegBand::ALL
                .into_iter()
                .map(|band| {
                    let energy = (band.range_hz().0 < nyquist).then(|| {
                        power
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| band.contains(folded_frequency(k, n, rate)))
                            .map(|(_, p)| p)
                            .sum()
                    });
                    (band, energy)
                })
                .collect();
            Ok(BandEnergies { bands, total })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (TAU * freq * i as f64 / rate).cos()).collect()
    }

    #[test]
    fn eeg_record_dimensions() {
        let x = vec![0.0; 160_000];
        let mut opts = SpectrogramOptions::new(1024, 768);
        assert_eq!(opts.rows(), 513);
        assert_eq!(opts.frames(x.len()).unwrap(), 622);
        opts.paper_shape = true;
        let s = spectrogram_samples(&x, &opts).unwrap();
        assert_eq!(s.dim(), (513, 621));
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tone_lands_on_expected_row() {
        let x = tone(1000.0, 16_000.0, 16_000);
        let s = spectrogram_samples(&x, &SpectrogramOptions::new(1024, 768)).unwrap();
        for col in s.columns() {
            let argmax = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(argmax, 64);
        }
    }

    #[test]
    fn single_frame_is_not_dropped() {
        let mut opts = SpectrogramOptions::new(8, 4);
        opts.paper_shape = true;
        assert_eq!(opts.frames(8).unwrap(), 1);
        assert_eq!(opts.frames(12).unwrap(), 1);
    }

    #[test]
    fn window_errors() {
        let x = vec![0.0; 10];
        assert!(matches!(
            spectrogram_samples(&x, &SpectrogramOptions::new(16, 0)),
            Err(Error::WindowTooLong { window: 16, len: 10 })
        ));
        assert!(matches!(
            spectrogram_samples(&x, &SpectrogramOptions::new(4, 4)),
            Err(Error::InvalidWindow(_))
        ));
    }

    #[test]
    fn decibel_floor() {
        let mut opts = SpectrogramOptions::new(4, 0);
        opts.scale = MagnitudeScale::Decibel;
        let s = spectrogram_samples(&[0.0; 8], &opts).unwrap();
        assert!(s.iter().all(|&v| v == -200.0));
    }

    #[test]
    fn hann_is_periodic() {
        let w = hann(4);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 0.5).abs() < 1e-15 && (w[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_tone_dominates() {
        let rate = 250.0;
        let rec = MultiChannelRecord::new(vec![tone(6.0, rate, 1000)], rate).unwrap();
        let e = &band_energies(&rec).unwrap()[0];
        assert_eq!(e.dominant(), Some(EegBand::Theta));
        assert!(e.fraction(EegBand::Theta).unwrap() > 0.99);
        let parseval: f64 = rec.channel(0).iter().map(|x| x * x).sum::<f64>() * 1000.0;
        assert!((e.total - parseval).abs() <= 1e-9 * parseval);
        for band in EegBand::ALL {
            assert!(e.get(band).unwrap() <= e.total);
        }
    }

    #[test]
    fn zero_channel_and_absent_bands() {
        let rec = MultiChannelRecord::zeros(1, 64, 100.0).unwrap();
        let e = &band_energies(&rec).unwrap()[0];
        assert_eq!(e.get(EegBand::Delta), Some(0.0));
        // gamma starts at 30 Hz, below the 50 Hz Nyquist
        assert_eq!(e.get(EegBand::Gamma), Some(0.0));
        assert_eq!(e.dominant(), None);

        let rec = MultiChannelRecord::zeros(1, 64, 40.0).unwrap();
        let e = &band_energies(&rec).unwrap()[0];
        assert_eq!(e.bands[&EegBand::Gamma], None);
        assert_eq!(e.bands[&EegBand::Beta], Some(0.0));
    }

    #[test]
    fn band_names_parse() {
        for b in EegBand::ALL {
            assert_eq!(b.name().parse::<EegBand>().unwrap(), b);
        }
        assert_eq!("Alpha".parse::<EegBand>().unwrap(), EegBand::Alpha);
        assert!("kappa".parse::<EegBand>().is_err());
    }
}
