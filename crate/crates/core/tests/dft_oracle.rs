use std::f64::consts::TAU;

use bandstack::spectrum::{forward_fft, forward_fft_complex, inverse_fft};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Direct `O(N^2)` DFT with compensated sums and twiddles indexed by `k*n mod N`.
fn dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let twiddle: Vec<(f64, f64)> = (0..n)
        .map(|m| {
            let a = -TAU * m as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (Kahan::default(), Kahan::default());
            for (i, &v) in x.iter().enumerate() {
                let (c, s) = twiddle[(k * i) % n];
                re.add(v * c);
                im.add(v * s);
            }
            Complex64::new(re.sum, im.sum)
        })
        .collect()
}

fn relative_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    let err = got.iter().zip(want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 { err } else { err / scale }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn matches_direct_sum_for_random_lengths() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0df7);
    let mut lengths: Vec<usize> = (0..100).map(|_| rng.random_range(2..=256)).collect();
    lengths.extend([2, 3, 16, 97, 250, 256]);
    for n in lengths {
        let x = random_vec(&mut rng, n);
        let got = forward_fft(&x, 1.0).unwrap();
        let err = relative_error(got.bins(), &dft(&x));
        assert!(err < 1e-12, "N={n}: relative error {err:e}");
    }
}

#[test]
fn matches_direct_sum_at_recording_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let x = random_vec(&mut rng, 10_000);
    let err = relative_error(forward_fft(&x, 1000.0).unwrap().bins(), &dft(&x));
    assert!(err < 1e-12, "relative error {err:e}");
}

#[test]
fn spec_length_16_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let x = random_vec(&mut rng, 16);
    assert!(relative_error(forward_fft(&x, 16.0).unwrap().bins(), &dft(&x)) < 1e-12);
}

#[test]
fn inverse_of_forward_is_identity_at_1024() {
    let mut rng = ChaCha8Rng::seed_from_u64(1024);
    let x = random_vec(&mut rng, 1024);
    let back = inverse_fft(forward_fft(&x, 1.0).unwrap().bins()).unwrap();
    let want: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    assert!(relative_error(&back, &want) < 1e-12);
}

fn signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 2..=max_len)
}

proptest! {
    #[test]
    fn conjugate_symmetric_for_real_input(x in signal(256)) {
        let bins = forward_fft(&x, 1.0).unwrap().into_bins();
        let n = bins.len();
        let peak = bins.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 1..n {
            prop_assert!((bins[k] - bins[n - k].conj()).norm() <= 1e-9 * peak.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn parseval(x in signal(256)) {
        let bins = forward_fft(&x, 1.0).unwrap().into_bins();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = bins.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        prop_assert!((time - freq).abs() <= 1e-9 * time.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn linear(pair in (2usize..200).prop_flat_map(|n| (
        prop::collection::vec(-1.0f64..1.0, n),
        prop::collection::vec(-1.0f64..1.0, n),
    )), a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let (x, y) = pair;
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let fx = forward_fft(&x, 1.0).unwrap().into_bins();
        let fy = forward_fft(&y, 1.0).unwrap().into_bins();
        let want: Vec<Complex64> = fx.iter().zip(&fy).map(|(u, v)| u * a + v * b).collect();
        let got = forward_fft(&mix, 1.0).unwrap().into_bins();
        prop_assert!(relative_error(&got, &want) <= 1e-9);
    }

    #[test]
    fn complex_round_trip(re in prop::collection::vec(-1.0f64..1.0, 2..300), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<Complex64> = re.iter().map(|&r| Complex64::new(r, rng.random_range(-1.0..1.0))).collect();
        let back = inverse_fft(&forward_fft_complex(&z).unwrap()).unwrap();
        prop_assert!(relative_error(&back, &z) < 1e-12);
    }
}
