//! Domain types shared across the crate.
//!
//! Every type validates its invariants at construction, so a value that
//! exists is a valid one. Channels are 0-based in this API.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the provenance / sidecar layout written by this crate.
pub const FORMAT_VERSION: u32 = 1;

/// Peak absolute sample value after scaling in real-output modes.
pub const AUDIO_PEAK: f64 = 0.9;

/// Checks the invariants of a multi-channel record without constructing one.
pub fn validate_record(channels: &[Vec<f64>], sample_rate_hz: f64) -> Result<()> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidRate(sample_rate_hz));
    }
    let first = channels.first().ok_or(Error::NoChannels)?;
    let expected = first.len();
    for (channel, samples) in channels.iter().enumerate() {
        if samples.len() < 2 {
            return Err(Error::TooShort {
                channel,
                len: samples.len(),
            });
        }
        if samples.len() != expected {
            return Err(Error::Ragged {
                channel,
                expected,
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { channel, index });
        }
    }
    Ok(())
}

/// `p` synchronized channels of `N` real samples at a common rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelRecord {
    channels: Vec<Vec<f64>>,
    sample_rate_hz: f64,
    names: Option<Vec<String>>,
}

impl MultiChannelRecord {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate_hz: f64) -> Result<Self> {
        validate_record(&channels, sample_rate_hz)?;
        Ok(Self {
            channels,
            sample_rate_hz,
            names: None,
        })
    }

    /// Attaches opaque channel labels. They are carried through encode/decode
    /// but never interpreted.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.channels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} channel names for {} channels",
                names.len(),
                self.channels.len()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn zeros(p: usize, n: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![vec![0.0; n]; p], sample_rate_hz)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel (`N`).
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// `T = N / f_s` in seconds.
    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Largest absolute sample over all channels.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Complex spectrum of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectrum {
    bins: Vec<Complex64>,
    source_rate_hz: f64,
}

impl ChannelSpectrum {
    pub fn new(bins: Vec<Complex64>, source_rate_hz: f64) -> Result<Self> {
        if bins.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "spectrum needs at least 2 bins, got {}",
                bins.len()
            )));
        }
        if !(source_rate_hz.is_finite() && source_rate_hz > 0.0) {
            return Err(Error::InvalidRate(source_rate_hz));
        }
        Ok(Self {
            bins,
            source_rate_hz,
        })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn source_rate_hz(&self) -> f64 {
        self.source_rate_hz
    }

    /// Nominal frequency of bin `k` on the `0..f_s` grid with step `f_s/(N-1)`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        source_bin_frequency(k, self.bins.len(), self.source_rate_hz)
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }
}

/// `k * f_s/(N-1)`: bin `k` of an `N`-bin grid spanning `0..=f_s`.
pub fn source_bin_frequency(k: usize, n: usize, sample_rate_hz: f64) -> f64 {
    k as f64 * (sample_rate_hz / (n - 1) as f64)
}

/// Output length `N' = round(T * F_s)` with `T = N / f_s`.
pub fn wideband_len(n: usize, source_rate_hz: f64, target_rate_hz: f64) -> usize {
    (n as f64 / source_rate_hz * target_rate_hz).round() as usize
}

/// How the stacked spectrum is turned into a waveform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Keeps the complex IFFT output (two sample planes), no refusal.
    PaperComplex,
    /// Mirrors the stacked spectrum so the waveform is real and playable.
    #[default]
    RealHermitian,
    /// Real output, refusing any plan that cannot be inverted exactly.
    StrictLossless,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::PaperComplex, Mode::RealHermitian, Mode::StrictLossless];

    /// True when the output waveform is real-valued.
    pub fn is_real(self) -> bool {
        !matches!(self, Mode::PaperComplex)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PaperComplex => "paper-complex",
            Mode::RealHermitian => "real-hermitian",
            Mode::StrictLossless => "strict-lossless",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown mode {s:?} (expected paper-complex, real-hermitian or strict-lossless)"
                ))
            })
    }
}

/// Permutation of channel indices: position `q` of the wideband spectrum
/// holds channel `order[q]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackingOrder(Vec<usize>);

impl StackingOrder {
    pub fn identity(p: usize) -> Self {
        Self((0..p).collect())
    }

    pub fn reverse(p: usize) -> Self {
        Self((0..p).rev().collect())
    }

    /// Builds an order from 0-based channel indices.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &c in &order {
            if c >= order.len() || seen[c] {
                return Err(Error::InvalidConfig(format!(
                    "stacking order {order:?} is not a permutation of 0..{}",
                    order.len()
                )));
            }
            seen[c] = true;
        }
        if order.is_empty() {
            return Err(Error::InvalidConfig("empty stacking order".into()));
        }
        Ok(Self(order))
    }

    /// Builds an order from 1-based channel numbers, as used in files and on
    /// the command line.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        if order.contains(&0) {
            return Err(Error::InvalidConfig(
                "channel numbers in a stacking order are 1-based".into(),
            ));
        }
        Self::new(order.iter().map(|c| c - 1).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Band position of each channel (the inverse permutation).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (q, &c) in self.0.iter().enumerate() {
            pos[c] = q;
        }
        pos
    }
}

/// Encoder settings. The channel count comes from the record being encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    pub target_rate_hz: f64,
    pub mode: Mode,
    /// `None` stacks channel 1 at the bottom, channel `p` at the top.
    pub stacking_order: Option<StackingOrder>,
}

impl TransformConfig {
    pub fn new(target_rate_hz: f64, mode: Mode) -> Self {
        Self {
            target_rate_hz,
            mode,
            stacking_order: None,
        }
    }

    pub fn with_order(mut self, order: StackingOrder) -> Self {
        self.stacking_order = Some(order);
        self
    }

    /// Resolves the stacking order for `p` channels, checking its length.
    pub fn order_for(&self, p: usize) -> Result<StackingOrder> {
        match &self.stacking_order {
            None => Ok(StackingOrder::identity(p)),
            Some(o) if o.len() == p => Ok(o.clone()),
            Some(o) => Err(Error::InvalidConfig(format!(
                "stacking order has {} entries for {p} channels",
                o.len()
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rate_hz.is_finite() && self.target_rate_hz > 0.0) {
            return Err(Error::InvalidRate(self.target_rate_hz));
        }
        Ok(())
    }
}

/// The wideband spectrum `S` with `N'` bins at rate `F_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSpectrum {
    pub bins: Vec<Complex64>,
    pub rate_hz: f64,
}

/// Waveform samples: real in real-output modes, complex in paper-complex mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Samples::Real(_))
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match self {
            Samples::Real(_) => None,
            Samples::Complex(v) => Some(v),
        }
    }

    /// Widens to complex regardless of the stored representation.
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    pub fn peak(&self) -> f64 {
        match self {
            Samples::Real(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Samples::Complex(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.norm())),
        }
    }
}

/// Everything decode needs besides the samples themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub format_version: u32,
    pub channels: usize,
    pub samples_per_channel: usize,
    pub source_rate_hz: f64,
    pub target_rate_hz: f64,
    pub mode: Mode,
    pub stacking_order: StackingOrder,
    /// Stored samples = raw IFFT output x `scale`.
    pub scale: f64,
    pub collision_count: usize,
    pub lossless: bool,
    /// `T * F_s - N'`, nonzero when the output length had to be rounded.
    pub length_residual: f64,
    pub channel_names: Option<Vec<String>>,
}

impl Provenance {
    pub fn config(&self) -> TransformConfig {
        TransformConfig::new(self.target_rate_hz, self.mode).with_order(self.stacking_order.clone())
    }
}

/// The single-channel output `s[t']` plus the provenance needed to invert it.
#[derive(Debug, Clone, PartialEq)]
pub struct WidebandSignal {
    pub samples: Samples,
    pub rate_hz: f64,
    pub provenance: Provenance,
    /// Relative rounding unit of the stored samples: 0 for exact doubles,
    /// `2^-24` once they have passed through f32.
    pub quantization: f64,
}

impl WidebandSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eeg_record_dimensions_are_valid() {
        let rec = MultiChannelRecord::zeros(30, 10_000, 1000.0).unwrap();
        assert_eq!(rec.channel_count(), 30);
        assert_eq!(rec.len(), 10_000);
        assert_eq!(rec.duration_s(), 10.0);
    }

    #[test]
    fn ragged_channels_are_rejected() {
        let err = MultiChannelRecord::new(vec![vec![0.0; 8], vec![0.0; 9]], 10.0).unwrap_err();
        assert!(matches!(
            err,
            Error::Ragged {
                channel: 1,
                expected: 8,
                found: 9
            }
        ));
        assert!(err.to_string().contains("channel 2"));
    }

    #[test]
    fn degenerate_zero_record_is_legal() {
        let rec = MultiChannelRecord::new(vec![vec![0.0; 4]], 4.0).unwrap();
        assert_eq!(rec.duration_s(), 1.0);
    }

    #[test]
    fn invalid_records_name_the_offender() {
        assert!(matches!(
            MultiChannelRecord::new(vec![], 10.0),
            Err(Error::NoChannels)
        ));
        assert!(matches!(
            MultiChannelRecord::new(vec![vec![0.0; 4], vec![]], 10.0),
            Err(Error::TooShort { channel: 1, len: 0 })
        ));
        assert!(matches!(
            MultiChannelRecord::new(vec![vec![0.0, f64::NAN, 1.0]], 10.0),
            Err(Error::NonFiniteSample {
                channel: 0,
                index: 1
            })
        ));
        for rate in [0.0, -1.0, f64::INFINITY, f64::NAN] {
            assert!(matches!(
                MultiChannelRecord::new(vec![vec![0.0; 4]], rate),
                Err(Error::InvalidRate(_))
            ));
        }
    }

    #[test]
    fn stacking_order_checks_permutation() {
        assert!(StackingOrder::new(vec![2, 0, 1]).is_ok());
        assert!(StackingOrder::new(vec![0, 0, 1]).is_err());
        assert!(StackingOrder::new(vec![0, 3, 1]).is_err());
        assert!(StackingOrder::from_one_based(&[0, 1]).is_err());
        let o = StackingOrder::from_one_based(&[3, 1, 2]).unwrap();
        assert_eq!(o.as_slice(), &[2, 0, 1]);
        assert_eq!(o.positions(), vec![1, 2, 0]);
        assert_eq!(o.to_one_based(), vec![3, 1, 2]);
    }

    #[test]
    fn mode_parses_its_own_names() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("lossless".parse::<Mode>().is_err());
    }

    #[test]
    fn wideband_len_rounds() {
        assert_eq!(wideband_len(10_000, 1000.0, 16_000.0), 160_000);
        assert_eq!(wideband_len(5, 10.0, 100.0), 50);
        assert_eq!(wideband_len(3, 7.0, 10.0), 4);
    }

    proptest::proptest! {
        #[test]
        fn duration_round_trips_sample_count(n in 2usize..5000, rate in 1.0f64..50_000.0) {
            let rec = MultiChannelRecord::zeros(1, n, rate).unwrap();
            proptest::prop_assert_eq!((rec.duration_s() * rec.sample_rate_hz()).round() as usize, n);
        }
    }
}
