//! Reversible stacking of a multi-channel, low-bandwidth recording into one
//! high-bandwidth waveform.
//!
//! Each channel's spectrum is stretched into its own slice of the wideband
//! spectrum; the inverse FFT of the stacked spectrum is the output signal.
//! Decoding reads the slices back out. See [`transform::encode`] and
//! [`transform::decode`].

pub mod bench;
pub mod error;
pub mod features;
pub mod io;
pub mod mapping;
pub mod model;
pub mod spectrum;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
pub use mapping::{build_band_plan, BandPlan};
pub use model::{
    ChannelSpectrum, Mode, MultiChannelRecord, Provenance, Samples, StackingOrder, TransformConfig,
    WidebandSignal,
};
pub use transform::{decode, encode, roundtrip_report, RoundtripReport};
