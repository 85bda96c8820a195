use std::path::PathBuf;

/// Errors raised by the library.
///
/// Channel numbers in messages are 1-based; sample and bin indices are 0-based.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("record has no channels")]
    NoChannels,

    #[error("channel {} has {len} samples, at least 2 are required", .channel + 1)]
    TooShort { channel: usize, len: usize },

    #[error("ragged record: channel {} has {found} samples, expected {expected}", .channel + 1)]
    Ragged {
        channel: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite sample in channel {} at index {index}", .channel + 1)]
    NonFiniteSample { channel: usize, index: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("strict-lossless requires F_s ≥ p·f_s = {required}, got F_s = {target}")]
    BelowRateBound { required: f64, target: f64 },

    #[error(
        "strict-lossless: plan destroys {lost} information-bearing bins; first is channel {} bin {bin} ({cause})",
        .channel + 1
    )]
    LossyPlan {
        lost: usize,
        channel: usize,
        bin: usize,
        cause: String,
    },

    #[error("spectrum has nonzero bin {index} in the upper half")]
    UpperHalfNonzero { index: usize },

    #[error("imaginary residue {residue:e} exceeds limit {limit:e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("provenance: {0}")]
    Provenance(String),

    #[error("unsupported format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("complex (paper-complex) signal is not playable and cannot be written as WAV")]
    ComplexNotPlayable,

    #[error("operation requires a real-valued signal")]
    ComplexSignal,

    #[error("tone at {freq} Hz is not below Nyquist ({nyquist} Hz)")]
    ToneAboveNyquist { freq: f64, nyquist: f64 },

    #[error("band {band} lies entirely above Nyquist ({nyquist} Hz)")]
    BandAboveNyquist { band: String, nyquist: f64 },

    #[error("band {band} contains no frequency bins at this resolution")]
    EmptyBand { band: String },

    #[error("window of {window} samples exceeds signal length {len}")]
    WindowTooLong { window: usize, len: usize },

    #[error("invalid window/overlap: {0}")]
    InvalidWindow(String),

    #[error("missing sidecar {}", .path.display())]
    MissingSidecar { path: PathBuf },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}, column {column}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", .path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by an infeasible strict-lossless configuration.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::BelowRateBound { .. } | Error::LossyPlan { .. })
    }

    /// True for filesystem failures (missing, unreadable or unwritable files).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
