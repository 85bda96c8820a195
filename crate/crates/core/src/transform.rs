//! End-to-end encode and decode.
//!
//! Encode: per-channel FFT, band plan, stacking, inverse FFT. Decode runs the
//! same steps backwards using only the signal's provenance.
//!
//! In the real-output modes the waveform is `Re(IFFT(S))`. Because every band
//! lies in `[0, F_s/2]`, the FFT of that waveform holds `S[k]/2` at interior
//! bins `0 < k < N'/2` and `Re S[k]` at DC and Nyquist, which decode undoes by
//! doubling the interior bins.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::{apply_stacking, build_band_plan, BandPlan};
use crate::model::{
    Mode, MultiChannelRecord, Provenance, Samples, TransformConfig, WidebandSignal, AUDIO_PEAK,
    FORMAT_VERSION,
};
use crate::spectrum::{forward_fft, forward_fft_complex, hermitian_extend, inverse_fft};

/// Relative tolerance for imaginary residue in outputs that must be real.
pub const REAL_RESIDUE_TOLERANCE: f64 = 1e-9;

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `slack` is an absolute allowance for noise already present in the input.
fn check_real(values: &[Complex64], slack: f64) -> Result<()> {
    let residue = max_abs(values.iter().map(|z| z.im));
    let limit = REAL_RESIDUE_TOLERANCE * max_abs(values.iter().map(|z| z.re)) + slack;
    if residue > limit {
        return Err(Error::ImaginaryResidue { residue, limit });
    }
    Ok(())
}

/// Lower-half spectrum whose Hermitian extension has `Re(IFFT(bins))` as its
/// inverse: interior bins halved, DC and Nyquist reduced to their real parts.
fn real_part_spectrum(bins: &[Complex64]) -> Vec<Complex64> {
    let m = bins.len();
    let mut out = bins.to_vec();
    for (k, z) in out.iter_mut().enumerate() {
        if k == 0 || 2 * k == m {
            *z = Complex64::new(z.re, 0.0);
        } else if 2 * k < m {
            *z *= 0.5;
        }
    }
    out
}

/// Encodes `record` into a single wideband waveform.
pub fn encode(record: &MultiChannelRecord, config: &TransformConfig) -> Result<WidebandSignal> {
    let plan = build_band_plan(
        record.channel_count(),
        record.len(),
        record.sample_rate_hz(),
        config,
    )?;
    encode_with_plan(record, &plan)
}

/// Encodes with a plan built beforehand (e.g. to report on it first).
pub fn encode_with_plan(record: &MultiChannelRecord, plan: &BandPlan) -> Result<WidebandSignal> {
    let inputs = plan.inputs();
    if record.channel_count() != inputs.channels
        || record.len() != inputs.samples
        || record.sample_rate_hz() != inputs.source_rate_hz
    {
        return Err(Error::InvalidConfig(
            "plan was built for a different record shape".into(),
        ));
    }
    let f_s = record.sample_rate_hz();
    let spectra = record
        .channels()
        .par_iter()
        .map(|c| forward_fft(c, f_s))
        .collect::<Result<Vec<_>>>()?;
    let stacked = apply_stacking(&spectra, plan)?;
    if !plan.is_lossless() {
        log::warn!(
            "band plan loses {} information-bearing bins ({} destination collisions); decode will not be exact",
            plan.losses().len(),
            plan.collision_count()
        );
    }

    let (samples, scale) = if plan.mode().is_real() {
        let extended = hermitian_extend(&real_part_spectrum(&stacked.bins))?;
        let waveform = inverse_fft(&extended)?;
        check_real(&waveform, 0.0)?;
        let peak = max_abs(waveform.iter().map(|z| z.re));
        let scale = if peak > 0.0 { AUDIO_PEAK / peak } else { 1.0 };
        let real: Vec<f64> = waveform.iter().map(|z| z.re * scale).collect();
        (Samples::Real(real), scale)
    } else {
        (Samples::Complex(inverse_fft(&stacked.bins)?), 1.0)
    };
    if !scale.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    let bad = match &samples {
        Samples::Real(v) => v.iter().position(|x| !x.is_finite()),
        Samples::Complex(v) => v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())),
    };
    if let Some(index) = bad {
        return Err(Error::NonFinite { index });
    }

    Ok(WidebandSignal {
        samples,
        rate_hz: inputs.target_rate_hz,
        provenance: Provenance {
            format_version: FORMAT_VERSION,
            channels: inputs.channels,
            samples_per_channel: inputs.samples,
            source_rate_hz: inputs.source_rate_hz,
            target_rate_hz: inputs.target_rate_hz,
            mode: plan.mode(),
            stacking_order: plan.order().clone(),
            scale,
            collision_count: plan.collision_count(),
            lossless: plan.is_lossless(),
            length_residual: inputs.length_residual(),
            channel_names: record.names().map(<[String]>::to_vec),
        },
        quantization: 0.0,
    })
}

/// Rebuilds the plan described by `signal`'s provenance and checks that the
/// signal is consistent with it.
pub fn plan_for(signal: &WidebandSignal) -> Result<BandPlan> {
    let prov = &signal.provenance;
    if prov.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: prov.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if prov.stacking_order.len() != prov.channels {
        return Err(Error::Provenance(format!(
            "stacking order has {} entries for {} channels",
            prov.stacking_order.len(),
            prov.channels
        )));
    }
    if signal.rate_hz != prov.target_rate_hz {
        return Err(Error::Provenance(format!(
            "signal rate {} Hz differs from provenance target rate {} Hz",
            signal.rate_hz, prov.target_rate_hz
        )));
    }
    if !(prov.scale.is_finite() && prov.scale > 0.0) {
        return Err(Error::Provenance(format!("invalid scale factor {}", prov.scale)));
    }
    if signal.samples.is_real() != prov.mode.is_real() {
        return Err(Error::Provenance(format!(
            "{} samples do not match mode {}",
            if signal.samples.is_real() { "real" } else { "complex" },
            prov.mode
        )));
    }
    let plan = build_band_plan(
        prov.channels,
        prov.samples_per_channel,
        prov.source_rate_hz,
        &prov.config(),
    )?;
    if plan.wideband_len() != signal.len() {
        return Err(Error::Provenance(format!(
            "signal has {} samples, provenance implies {}",
            signal.len(),
            plan.wideband_len()
        )));
    }
    if plan.collision_count() != prov.collision_count || plan.is_lossless() != prov.lossless {
        return Err(Error::Provenance(
            "recorded collision summary does not match the rebuilt plan".into(),
        ));
    }
    Ok(plan)
}

/// Recovers the multi-channel record from a wideband signal.
pub fn decode(signal: &WidebandSignal) -> Result<MultiChannelRecord> {
    let plan = plan_for(signal)?;
    if plan.mode() == Mode::StrictLossless {
        plan.require_lossless()?;
    }
    let prov = &signal.provenance;
    let unscale = 1.0 / prov.scale;

    let stacked = match &signal.samples {
        Samples::Complex(v) => {
            let raw: Vec<Complex64> = v.iter().map(|z| z * unscale).collect();
            forward_fft_complex(&raw)?
        }
        Samples::Real(v) => {
            let raw: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x * unscale, 0.0)).collect();
            let mut bins = forward_fft_complex(&raw)?;
            let m = bins.len();
            for (k, z) in bins.iter_mut().enumerate() {
                if k != 0 && 2 * k < m {
                    *z *= 2.0;
                }
            }
            bins
        }
    };

    let n = prov.samples_per_channel;
    let exact = plan.is_lossless();
    // Rounding error e with |e_t| <= u|s_t| reaches a channel through
    // FFT (norm sqrt N'), the x2 gather and IFFT (norm 1/sqrt N).
    let slack = if signal.quantization > 0.0 {
        let energy: f64 = signal.samples.to_complex().iter().map(|z| z.norm_sqr()).sum();
        2.0 * (plan.wideband_len() as f64 / n as f64).sqrt() * signal.quantization * energy.sqrt() * unscale
    } else {
        0.0
    };
    let channels = (0..prov.channels)
        .into_par_iter()
        .map(|ch| {
            let dest = plan.assignment(ch);
            let bins: Vec<Complex64> = (0..n)
                .map(|j| {
                    let mirror = (n - j) % n;
                    if plan.survived(ch, j) {
                        stacked[dest[j]]
                    } else if plan.survived(ch, mirror) {
                        stacked[dest[mirror]].conj()
                    } else {
                        stacked[dest[j]]
                    }
                })
                .collect();
            let time = inverse_fft(&bins)?;
            if exact {
                check_real(&time, slack)?;
            }
            Ok(time.into_iter().map(|z| z.re).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let record = MultiChannelRecord::new(channels, prov.source_rate_hz)?;
    match &prov.channel_names {
        Some(names) => record.with_names(names.clone()),
        None => Ok(record),
    }
}

/// Measured fidelity of one encode/decode round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub mode: Mode,
    pub channels: usize,
    pub samples: usize,
    pub wideband_samples: usize,
    pub max_abs_error: f64,
    /// `max_abs_error / max|x|` (absolute when the input is all zeros).
    pub relative_error: f64,
    pub per_channel_rmse: Vec<f64>,
    pub collision_count: usize,
    pub lost_bins: usize,
    pub lossless: bool,
    /// `F_s >= p * f_s`.
    pub meets_rate_bound: bool,
}

/// Encodes, decodes and measures the reconstruction error. Lossy
/// configurations are measured, not rejected (strict mode still refuses them).
pub fn roundtrip_report(record: &MultiChannelRecord, config: &TransformConfig) -> Result<RoundtripReport> {
    let plan = build_band_plan(
        record.channel_count(),
        record.len(),
        record.sample_rate_hz(),
        config,
    )?;
    let signal = encode_with_plan(record, &plan)?;
    let decoded = decode(&signal)?;
    let (max_abs_error, per_channel_rmse) = compare_records(record, &decoded)?;
    let peak = record.peak();
    Ok(RoundtripReport {
        mode: plan.mode(),
        channels: plan.channels(),
        samples: plan.samples(),
        wideband_samples: plan.wideband_len(),
        max_abs_error,
        relative_error: if peak > 0.0 { max_abs_error / peak } else { max_abs_error },
        per_channel_rmse,
        collision_count: plan.collision_count(),
        lost_bins: plan.losses().len(),
        lossless: plan.is_lossless(),
        meets_rate_bound: plan.meets_rate_bound(),
    })
}

/// Max absolute difference and per-channel RMSE between two records of the
/// same shape.
pub fn compare_records(a: &MultiChannelRecord, b: &MultiChannelRecord) -> Result<(f64, Vec<f64>)> {
    if a.channel_count() != b.channel_count() || a.len() != b.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot compare {}x{} record with {}x{} record",
            a.channel_count(),
            a.len(),
            b.channel_count(),
            b.len()
        )));
    }
    let mut max_err = 0.0_f64;
    let rmse = a
        .channels()
        .iter()
        .zip(b.channels())
        .map(|(x, y)| {
            let sq: f64 = x
                .iter()
                .zip(y)
                .map(|(u, v)| {
                    let d = u - v;
                    max_err = max_err.max(d.abs());
                    d * d
                })
                .sum();
            (sq / x.len() as f64).sqrt()
        })
        .collect();
    Ok((max_err, rmse))
}
