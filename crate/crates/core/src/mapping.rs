//! Stretch-and-stack assignment of source bins to wideband bins.
//!
//! Each channel's `N` bins sit on the grid `j * f_s/(N-1)`, spanning `0..=f_s`.
//! The grid is scaled by `f_band/f_s` and offset to its band `l_f = q * f_band`,
//! then every stretched frequency is snapped to the closest point of the
//! destination grid `linspace(0, F_s, N')`. Ties go to the larger index.
//!
//! [`stack_oracle`] is the exhaustive `O(N * N')` search; [`stack_fast`]
//! produces the identical assignment in `O(N)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    source_bin_frequency, wideband_len, ChannelSpectrum, Mode, StackedSpectrum, StackingOrder,
    TransformConfig,
};
use rustfft::num_complex::Complex64;

/// `N'` points evenly spaced over `[0, stop]`, endpoints included.
///
/// Point `k` is `k * step` with `step = stop / (N'-1)`, except the last point
/// which is exactly `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DestGrid {
    len: usize,
    step: f64,
    stop: f64,
}

impl DestGrid {
    pub fn linspace(stop: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidConfig(format!(
                "destination grid needs at least 2 points, got N' = {len}"
            )));
        }
        Ok(Self {
            len,
            step: stop / (len - 1) as f64,
            stop,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `Delta`.
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.len {
            self.stop
        } else {
            k as f64 * self.step
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.value(k)).collect()
    }

    #[inline]
    fn distance(&self, k: usize, f: f64) -> f64 {
        (self.value(k) - f).abs()
    }

    /// Closest grid index to `f`, larger index on ties, in `O(1)`.
    ///
    /// The rounded distances `|value(k) - f|` are non-increasing then
    /// non-decreasing in `k`, so walking downhill from an estimate reaches
    /// the same index an exhaustive `<=` scan would.
    pub fn nearest(&self, f: f64) -> usize {
        let last = self.len - 1;
        let estimate = (f / self.step).round();
        let mut k = if estimate.is_nan() || estimate <= 0.0 {
            0
        } else if estimate >= last as f64 {
            last
        } else {
            estimate as usize
        };
        let mut d = self.distance(k, f);
        while k < last {
            let next = self.distance(k + 1, f);
            if next <= d {
                k += 1;
                d = next;
            } else {
                break;
            }
        }
        while k > 0 {
            let prev = self.distance(k - 1, f);
            if prev < d {
                k -= 1;
                d = prev;
            } else {
                break;
            }
        }
        k
    }
}

/// Exhaustive closest-point search over a materialized grid, as a literal
/// scan: every candidate with distance `<=` the running minimum replaces it.
pub fn nearest_by_scan(grid: &[f64], f: f64) -> usize {
    let mut min_v = f64::INFINITY;
    let mut best = 0;
    for (k, &g) in grid.iter().enumerate() {
        let d = (g - f).abs();
        if d <= min_v {
            min_v = d;
            best = k;
        }
    }
    best
}

/// The scalar inputs a plan is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanInputs {
    pub channels: usize,
    pub samples: usize,
    pub source_rate_hz: f64,
    pub target_rate_hz: f64,
}

impl PlanInputs {
    pub fn new(channels: usize, samples: usize, source_rate_hz: f64, target_rate_hz: f64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::NoChannels);
        }
        if samples < 2 {
            return Err(Error::TooShort {
                channel: 0,
                len: samples,
            });
        }
        for rate in [source_rate_hz, target_rate_hz] {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::InvalidRate(rate));
            }
        }
        let inputs = Self {
            channels,
            samples,
            source_rate_hz,
            target_rate_hz,
        };
        if inputs.wideband_len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "output would have N' = {} samples, at least 2 are required",
                inputs.wideband_len()
            )));
        }
        Ok(inputs)
    }

    pub fn wideband_len(&self) -> usize {
        wideband_len(self.samples, self.source_rate_hz, self.target_rate_hz)
    }

    /// `f_band = F_s / (2p)`.
    pub fn band_width_hz(&self) -> f64 {
        self.target_rate_hz / (2 * self.channels) as f64
    }

    /// `l_f` of the band at 0-based stacking position `band`.
    pub fn band_offset_hz(&self, band: usize) -> f64 {
        band as f64 * self.band_width_hz()
    }

    /// Stretch ratio `f_band / f_s` applied to the source grid.
    pub fn alpha(&self) -> f64 {
        self.band_width_hz() / self.source_rate_hz
    }

    pub fn dest_grid(&self) -> DestGrid {
        DestGrid::linspace(self.target_rate_hz, self.wideband_len())
            .expect("wideband length checked at construction")
    }

    /// Stretched source frequencies for stacking position `band`.
    pub fn stretched_frequencies(&self, band: usize) -> Vec<f64> {
        let offset = self.band_offset_hz(band);
        let f_band = self.band_width_hz();
        (0..self.samples)
            .map(|j| {
                let freq = source_bin_frequency(j, self.samples, self.source_rate_hz);
                offset + freq * f_band / self.source_rate_hz
            })
            .collect()
    }

    /// `F_s >= p * f_s`, the information-count bound for a real output.
    pub fn meets_rate_bound(&self) -> bool {
        self.target_rate_hz >= self.required_rate_hz()
    }

    pub fn required_rate_hz(&self) -> f64 {
        self.channels as f64 * self.source_rate_hz
    }

    /// `T * F_s - N'`.
    pub fn length_residual(&self) -> f64 {
        self.samples as f64 / self.source_rate_hz * self.target_rate_hz - self.wideband_len() as f64
    }
}

/// Destination indices for the band at stacking position `band`, by
/// exhaustive search over the whole destination grid.
pub fn stack_oracle(inputs: &PlanInputs, band: usize) -> Vec<usize> {
    let grid = inputs.dest_grid().values();
    inputs
        .stretched_frequencies(band)
        .into_iter()
        .map(|f| nearest_by_scan(&grid, f))
        .collect()
}

/// Same assignment as [`stack_oracle`], `O(1)` per source bin.
pub fn stack_fast(inputs: &PlanInputs, band: usize) -> Vec<usize> {
    let grid = inputs.dest_grid();
    inputs
        .stretched_frequencies(band)
        .into_iter()
        .map(|f| grid.nearest(f))
        .collect()
}

/// Why a source bin did not survive stacking intact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damage {
    /// A later write to the same destination bin replaced it.
    Overwritten { by_channel: usize, by_bin: usize },
    /// It landed on the DC or Nyquist bin of a real output, where only the
    /// real part survives.
    RealProjection,
}

/// A source bin that neither survived nor can be restored from its
/// conjugate mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinLoss {
    pub channel: usize,
    pub bin: usize,
    pub damage: Damage,
}

/// Complete stretch-and-stack mapping for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPlan {
    inputs: PlanInputs,
    mode: Mode,
    order: StackingOrder,
    grid: DestGrid,
    /// Per channel (not per position): destination index of every source bin.
    assignment: Vec<Vec<usize>>,
    collision_count: usize,
    /// Per channel: `None` when the bin survived, else what happened to it.
    damage: Vec<Vec<Option<Damage>>>,
    losses: Vec<BinLoss>,
}

/// Builds the plan for `p` channels of `n` samples at `source_rate_hz`.
pub fn build_band_plan(p: usize, n: usize, source_rate_hz: f64, config: &TransformConfig) -> Result<BandPlan> {
    config.validate()?;
    let inputs = PlanInputs::new(p, n, source_rate_hz, config.target_rate_hz)?;
    let order = config.order_for(p)?;
    if config.mode == Mode::StrictLossless && !inputs.meets_rate_bound() {
        return Err(Error::BelowRateBound {
            required: inputs.required_rate_hz(),
            target: inputs.target_rate_hz,
        });
    }

    let by_position: Vec<Vec<usize>> = (0..p)
        .into_par_iter()
        .map(|band| stack_fast(&inputs, band))
        .collect();
    let positions = order.positions();
    let assignment: Vec<Vec<usize>> = positions.iter().map(|&q| by_position[q].clone()).collect();

    let grid = inputs.dest_grid();
    let n_prime = grid.len();
    let mut writes = vec![0u32; n_prime];
    let mut owner = vec![(usize::MAX, usize::MAX); n_prime];
    for &ch in order.as_slice() {
        for (j, &k) in assignment[ch].iter().enumerate() {
            writes[k] += 1;
            owner[k] = (ch, j);
        }
    }
    let collision_count = writes.iter().filter(|&&w| w > 1).count();

    let is_edge = |k: usize| k == 0 || (n_prime % 2 == 0 && k == n_prime / 2);
    let self_conjugate = |j: usize| j == 0 || 2 * j == n;
    let damage: Vec<Vec<Option<Damage>>> = assignment
        .iter()
        .enumerate()
        .map(|(ch, dest)| {
            dest.iter()
                .enumerate()
                .map(|(j, &k)| {
                    let (by_channel, by_bin) = owner[k];
                    if (by_channel, by_bin) != (ch, j) {
                        Some(Damage::Overwritten { by_channel, by_bin })
                    } else if config.mode.is_real() && is_edge(k) && !self_conjugate(j) {
                        Some(Damage::RealProjection)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let mut losses = Vec::new();
    for ch in 0..p {
        for j in 0..n {
            if let Some(d) = damage[ch][j] {
                if damage[ch][(n - j) % n].is_some() {
                    losses.push(BinLoss {
                        channel: ch,
                        bin: j,
                        damage: d,
                    });
                }
            }
        }
    }

    Ok(BandPlan {
        inputs,
        mode: config.mode,
        order,
        grid,
        assignment,
        collision_count,
        damage,
        losses,
    })
}

impl BandPlan {
    pub fn inputs(&self) -> &PlanInputs {
        &self.inputs
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn order(&self) -> &StackingOrder {
        &self.order
    }

    pub fn channels(&self) -> usize {
        self.inputs.channels
    }

    pub fn samples(&self) -> usize {
        self.inputs.samples
    }

    pub fn wideband_len(&self) -> usize {
        self.grid.len()
    }

    pub fn band_width_hz(&self) -> f64 {
        self.inputs.band_width_hz()
    }

    pub fn alpha(&self) -> f64 {
        self.inputs.alpha()
    }

    pub fn dest_grid(&self) -> &DestGrid {
        &self.grid
    }

    /// Band offset `l_f` of `channel`, following the stacking order.
    pub fn band_offset_hz(&self, channel: usize) -> f64 {
        self.inputs.band_offset_hz(self.order.positions()[channel])
    }

    /// `[l_f, l_f + f_band]` of `channel`.
    pub fn band_range_hz(&self, channel: usize) -> (f64, f64) {
        let lo = self.band_offset_hz(channel);
        (lo, lo + self.band_width_hz())
    }

    pub fn assignment(&self, channel: usize) -> &[usize] {
        &self.assignment[channel]
    }

    /// Destination bins written more than once.
    pub fn collision_count(&self) -> usize {
        self.collision_count
    }

    /// `F_s >= p * f_s`: necessary for an exact inverse.
    pub fn meets_rate_bound(&self) -> bool {
        self.inputs.meets_rate_bound()
    }

    /// True when every source bin either survives or can be restored from
    /// its conjugate mirror, so decode reproduces the input exactly.
    pub fn is_lossless(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn losses(&self) -> &[BinLoss] {
        &self.losses
    }

    pub fn damage(&self, channel: usize, bin: usize) -> Option<Damage> {
        self.damage[channel][bin]
    }

    pub fn survived(&self, channel: usize, bin: usize) -> bool {
        self.damage[channel][bin].is_none()
    }

    fn loss_error(&self) -> Option<Error> {
        let first = self.losses.first()?;
        let cause = match first.damage {
            Damage::Overwritten { by_channel, by_bin } => {
                format!("overwritten by channel {} bin {by_bin}", by_channel + 1)
            }
            Damage::RealProjection => "imaginary part dropped at DC/Nyquist".to_string(),
        };
        Some(Error::LossyPlan {
            lost: self.losses.len(),
            channel: first.channel,
            bin: first.bin,
            cause,
        })
    }

    /// Errors if this plan cannot be inverted exactly.
    pub fn require_lossless(&self) -> Result<()> {
        match self.loss_error() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Writes every channel's bins into a zeroed wideband spectrum, channel by
/// channel in stacking order and bin by bin ascending; later writes win.
///
/// Strict-lossless plans refuse to stack when information would be lost.
pub fn apply_stacking(spectra: &[ChannelSpectrum], plan: &BandPlan) -> Result<StackedSpectrum> {
    if spectra.len() != plan.channels() {
        return Err(Error::InvalidConfig(format!(
            "{} spectra for a {}-channel plan",
            spectra.len(),
            plan.channels()
        )));
    }
    if let Some(bad) = spectra.iter().position(|s| s.len() != plan.samples()) {
        return Err(Error::Ragged {
            channel: bad,
            expected: plan.samples(),
            found: spectra[bad].len(),
        });
    }
    if plan.mode() == Mode::StrictLossless {
        plan.require_lossless()?;
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); plan.wideband_len()];
    for &ch in plan.order().as_slice() {
        for (&k, &value) in plan.assignment(ch).iter().zip(spectra[ch].bins()) {
            bins[k] = value;
        }
    }
    Ok(StackedSpectrum {
        bins,
        rate_hz: plan.inputs().target_rate_hz,
    })
}
