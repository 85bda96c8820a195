use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bandstack::features::{band_energies, EegBand};
use bandstack::io::{read_multichannel, read_wideband, write_multichannel, RecordFormat};
use bandstack::synth::make_bandnoise;
use bandstack::{decode, encode, Mode, MultiChannelRecord, TransformConfig};

fn bandstack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandstack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn eeg_input(dir: &Path) -> PathBuf {
    let path = dir.join("in.csv");
    let noise = make_bandnoise(30, 10_000, 1000.0, EegBand::Alpha, 5).unwrap();
    write_multichannel(&noise.record, &path, RecordFormat::Csv).unwrap();
    path
}

#[test]
fn encode_eeg_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let input = eeg_input(dir.path());
    let out = dir.path().join("out.wav");
    let o = bandstack(&[
        "encode", s(&input), "--rate", "1000", "--target-rate", "16000", "--mode", "real-hermitian", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("f_band = 266.667 Hz"), "{text}");
    assert!(text.contains("N' = 160000"), "{text}");
    assert!(text.contains("F_s >= p*f_s (30000 Hz): false"), "{text}");
    assert!(!text.contains("collisions = 0"), "{text}");
    assert_eq!(read_wideband(&out).unwrap().len(), 160_000);

    let info = bandstack(&["info", &format!("{}.sidecar", s(&out))]);
    assert_eq!(info.status.code(), Some(0));
    let text = stdout(&info);
    for needle in ["p=30", "f_s=1000 Hz", "mode=real-hermitian", "N'=160000"] {
        assert!(text.contains(needle), "{needle} missing from {text}");
    }

    let spec = dir.path().join("spec.f64");
    let o = bandstack(&["spectrogram", s(&out), s(&spec), "--window", "1024", "--overlap", "768", "--paper-shape"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "513 x 621");
    let o = bandstack(&["spectrogram", s(&out), s(&spec)]);
    assert_eq!(stdout(&o).trim(), "513 x 622");

    let o = bandstack(&["encode", s(&input), "--target-rate", "16000", "--mode", "strict-lossless", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("requires F_s ≥ p·f_s = 30000"), "{}", stderr(&o));

    let o = bandstack(&["verify", s(&input), "--target-rate", "16000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL"));
    assert!(!stdout(&o).contains("max_abs_error = 0e0"));
}

#[test]
fn cli_round_trip_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let record = make_bandnoise(4, 64, 32.0, EegBand::Delta, 2).unwrap().record;
    let input = dir.path().join("x.f64");
    write_multichannel(&record, &input, RecordFormat::RawF64).unwrap();
    let wide = dir.path().join("w.f64");
    let back = dir.path().join("y.f64");
    let o = bandstack(&["encode", s(&input), "--target-rate", "256", "--mode", "strict-lossless", "--order", "reverse", s(&wide)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("exactly lossless: true"));
    let o = bandstack(&["decode", s(&wide), s(&back), "--compare", s(&input)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ch4 rmse"));

    let config = TransformConfig::new(256.0, Mode::StrictLossless)
        .with_order(bandstack::StackingOrder::reverse(4));
    let library = decode(&encode(&record, &config).unwrap()).unwrap();
    let cli = read_multichannel(&back, RecordFormat::RawF64, None).unwrap();
    for (a, b) in library.channels().iter().flatten().zip(cli.channels().iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn zero_input_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.csv");
    std::fs::write(&input, "# rate_hz=100\n0,0\n0,0\n0,0\n0,0\n0,0\n0,0\n0,0\n0,0\n").unwrap();
    let wav = dir.path().join("zero.wav");
    let o = bandstack(&["encode", s(&input), "--target-rate", "800", s(&wav)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let signal = read_wideband(&wav).unwrap();
    assert!(signal.samples.as_real().unwrap().iter().all(|&v| v == 0.0));

    let back = dir.path().join("back.csv");
    let o = bandstack(&["decode", s(&wav), s(&back)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec = read_multichannel(&back, RecordFormat::Csv, None).unwrap();
    assert_eq!(rec.channels(), MultiChannelRecord::zeros(2, 8, 100.0).unwrap().channels());
    assert_eq!(rec.sample_rate_hz(), 100.0);

    let o = bandstack(&["verify", s(&input), "--target-rate", "800", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["max_abs_error"], 0.0);
    assert_eq!(report["pass"], true);
}

#[test]
fn verify_feasible_synthetic_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let o = bandstack(&["synth", s(&input), "-p", "4", "-n", "1000", "--rate", "250", "--band", "theta", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bandstack(&["verify", s(&input), "--target-rate", "2000", "--mode", "strict-lossless", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["relative_error"].as_f64().unwrap() < 1e-9);
    assert_eq!(report["collision_count"].as_u64(), Some(3));
    assert_eq!(report["per_channel_rmse"].as_array().unwrap().len(), 4);
}

#[test]
fn synth_alpha_is_alpha_dominant_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = bandstack(&["synth", s(path), "-p", "2", "-n", "2500", "--rate", "250", "--band", "alpha", "--seed", "1"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rec = read_multichannel(&a, RecordFormat::Csv, None).unwrap();
    for e in band_energies(&rec).unwrap() {
        assert_eq!(e.dominant(), Some(EegBand::Alpha));
    }

    let t = dir.path().join("t.csv");
    let o = bandstack(&["synth", s(&t), "-p", "2", "-n", "1000", "--rate", "250", "--tone", "2:6:1.5", "--tone", "1:10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let e = band_energies(&read_multichannel(&t, RecordFormat::Csv, None).unwrap()).unwrap();
    assert_eq!(e[0].dominant(), Some(EegBand::Alpha));
    assert_eq!(e[1].dominant(), Some(EegBand::Theta));

    let o = bandstack(&["synth", s(&t), "-n", "100", "--rate", "250", "--tone", "1:200"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(bandstack(&["info", s(&missing)]).status.code(), Some(1));
    assert_eq!(
        bandstack(&["encode", s(&missing), "--rate", "10", "--target-rate", "20", "o.wav"]).status.code(),
        Some(1)
    );
    assert_eq!(bandstack(&["encode"]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,oops\n").unwrap();
    let o = bandstack(&["encode", s(&bad), "--rate", "10", "--target-rate", "40", "o.wav"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column 2"), "{}", stderr(&o));

    // decode without / with a broken sidecar
    let input = dir.path().join("x.csv");
    std::fs::write(&input, "# rate_hz=10\n1,2\n3,4\n5,6\n7,8\n").unwrap();
    let wide = dir.path().join("w.wav");
    assert_eq!(bandstack(&["encode", s(&input), "--target-rate", "80", s(&wide)]).status.code(), Some(0));
    let side = PathBuf::from(format!("{}.sidecar", s(&wide)));
    let text = std::fs::read_to_string(&side).unwrap();
    std::fs::write(&side, &text[..text.len() / 3]).unwrap();
    let out = dir.path().join("y.csv");
    assert_eq!(bandstack(&["decode", s(&wide), s(&out)]).status.code(), Some(2));
    std::fs::remove_file(&side).unwrap();
    let o = bandstack(&["decode", s(&wide), s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing sidecar"));

    // window longer than the signal, and a complex signal
    let complex = dir.path().join("c.f64");
    let o = bandstack(&["encode", s(&input), "--target-rate", "80", "--mode", "paper-complex", s(&complex)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = dir.path().join("m.csv");
    assert_eq!(bandstack(&["spectrogram", s(&complex), s(&m), "--window", "8", "--overlap", "4"]).status.code(), Some(2));
    assert_eq!(bandstack(&["encode", s(&input), "--target-rate", "80", "--mode", "paper-complex", "c.wav"]).status.code(), Some(2));
    let real = dir.path().join("r.f64");
    assert_eq!(bandstack(&["encode", s(&input), "--target-rate", "80", s(&real)]).status.code(), Some(0));
    let o = bandstack(&["spectrogram", s(&real), s(&m)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds signal length"));
    let o = bandstack(&["spectrogram", s(&real), s(&m), "--window", "8", "--overlap", "4", "--log"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "5 x 7");
    assert!(stdout(&bandstack(&["info", s(&m)])).contains("5 x 7"));

    let o = bandstack(&["encode", s(&input), "--target-rate", "80", "--order", "1,1", s(&real)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_identical_assignments() {
    let o = bandstack(&["bench", "-p", "4", "-n", "500", "--rate", "100", "--target-rate", "1600", "--oracle-channels", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["identical"], true);
    assert_eq!(report["wideband_len"], 8000);
}
