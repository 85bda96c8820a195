//! Forward/inverse DFT with an unnormalized forward sum and a `1/M` inverse.
//!
//! Any length is supported exactly; nothing is zero-padded.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::model::ChannelSpectrum;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn process(buf: &mut [Complex64], direction: FftDirection) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    fft.process(buf);
}

fn check_finite(values: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    for (index, (re, im)) in values.enumerate() {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::InvalidConfig(format!(
            "transform length must be at least 2, got {len}"
        )));
    }
    Ok(())
}

/// `X[k] = sum_n x[n] exp(-j 2 pi k n / N)` of a real channel.
pub fn forward_fft(channel: &[f64], sample_rate_hz: f64) -> Result<ChannelSpectrum> {
    check_len(channel.len())?;
    check_finite(channel.iter().map(|&x| (x, 0.0)))?;
    let mut buf: Vec<Complex64> = channel.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    process(&mut buf, FftDirection::Forward);
    ChannelSpectrum::new(buf, sample_rate_hz)
}

/// Unnormalized forward DFT of a complex sequence.
pub fn forward_fft_complex(input: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(input.len())?;
    check_finite(input.iter().map(|z| (z.re, z.im)))?;
    let mut buf = input.to_vec();
    process(&mut buf, FftDirection::Forward);
    Ok(buf)
}

/// `x[t] = (1/M) sum_k X[k] exp(+j 2 pi k t / M)`, summing `k = 0..M-1`.
pub fn inverse_fft(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(spectrum.len())?;
    check_finite(spectrum.iter().map(|z| (z.re, z.im)))?;
    let mut buf = spectrum.to_vec();
    process(&mut buf, FftDirection::Inverse);
    let norm = 1.0 / buf.len() as f64;
    for z in &mut buf {
        *z *= norm;
    }
    Ok(buf)
}

/// Fills the upper half of a lower-half-only spectrum with conjugate mirrors.
///
/// DC and (for even length) Nyquist are forced real. Fails if any bin above
/// `M/2` is nonzero.
pub fn hermitian_extend(lower: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = lower.len();
    let half = m / 2;
    if let Some(offset) = lower[half + 1..]
        .iter()
        .position(|z| z.re != 0.0 || z.im != 0.0)
    {
        return Err(Error::UpperHalfNonzero {
            index: half + 1 + offset,
        });
    }
    let mut out = lower.to_vec();
    if m == 0 {
        return Ok(out);
    }
    out[0].im = 0.0;
    if m.is_multiple_of(2) {
        out[half].im = 0.0;
    }
    // k < M/2, i.e. strictly below Nyquist for even M
    for k in 1..m.div_ceil(2) {
        out[m - k] = lower[k].conj();
    }
    Ok(out)
}

/// Largest `|X[k] - conj(X[M-k])|` over the spectrum.
pub fn conjugate_asymmetry(bins: &[Complex64]) -> f64 {
    let m = bins.len();
    (1..m)
        .map(|k| (bins[k] - bins[m - k].conj()).norm())
        .fold(bins.first().map_or(0.0, |z| z.im.abs()), f64::max)
}
