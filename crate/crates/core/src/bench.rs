//! Timing of the exhaustive and fast bin assignment on the same plan.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::mapping::{stack_fast, stack_oracle, PlanInputs};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StackingBench {
    pub channels: usize,
    pub samples: usize,
    pub wideband_len: usize,
    /// Channels the oracle was run on (the first `oracle_channels` positions).
    pub oracle_channels: usize,
    pub fast_seconds: f64,
    pub oracle_seconds: f64,
    /// Oracle time scaled to all channels.
    pub oracle_projected_seconds: f64,
    /// `oracle_seconds / fast_seconds`; the oracle covered at most as many
    /// channels as the fast path, so the true ratio is at least this.
    pub speedup_lower_bound: f64,
    pub identical: bool,
}

/// Runs `stack_fast` on every channel and `stack_oracle` on the first
/// `oracle_channels`, single-threaded, and compares results.
pub fn compare_stacking(
    p: usize,
    n: usize,
    source_rate_hz: f64,
    target_rate_hz: f64,
    oracle_channels: usize,
) -> Result<StackingBench> {
    let inputs = PlanInputs::new(p, n, source_rate_hz, target_rate_hz)?;
    if oracle_channels == 0 || oracle_channels > p {
        return Err(Error::InvalidConfig(format!(
            "oracle channel count must be in 1..={p}, got {oracle_channels}"
        )));
    }

    let start = Instant::now();
    let fast: Vec<Vec<usize>> = (0..p).map(|band| stack_fast(&inputs, band)).collect();
    let fast_time = start.elapsed().max(Duration::from_nanos(1));

    let start = Instant::now();
    let oracle: Vec<Vec<usize>> = (0..oracle_channels).map(|band| stack_oracle(&inputs, band)).collect();
    let oracle_time = start.elapsed();

    let identical = oracle.iter().zip(&fast).all(|(a, b)| a == b);
    let fast_seconds = fast_time.as_secs_f64();
    let oracle_seconds = oracle_time.as_secs_f64();
    Ok(StackingBench {
        channels: p,
        samples: n,
        wideband_len: inputs.wideband_len(),
        oracle_channels,
        fast_seconds,
        oracle_seconds,
        oracle_projected_seconds: oracle_seconds * p as f64 / oracle_channels as f64,
        speedup_lower_bound: oracle_seconds / fast_seconds,
        identical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_plan_agrees() {
        let b = compare_stacking(4, 100, 100.0, 900.0, 4).unwrap();
        assert!(b.identical);
        assert_eq!(b.wideband_len, 900);
        assert!(compare_stacking(4, 100, 100.0, 900.0, 5).is_err());
    }
}
