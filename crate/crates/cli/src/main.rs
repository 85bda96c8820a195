use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bandstack::bench::compare_stacking;
use bandstack::features::{spectrogram, EegBand, MagnitudeScale, SpectrogramOptions};
use bandstack::io::{
    read_matrix, read_multichannel, read_sidecar, read_wideband, write_matrix, write_multichannel, write_wideband,
    MatrixFormat, RecordFormat, Sidecar, WidebandFormat,
};
use bandstack::mapping::BandPlan;
use bandstack::synth::{make_bandnoise, make_tones, Tone};
use bandstack::transform::{compare_records, encode_with_plan};
use bandstack::{build_band_plan, decode, roundtrip_report, Error, Mode, MultiChannelRecord, StackingOrder, TransformConfig};
use clap::{Args, Parser, Subcommand};

/// Stack a multi-channel recording into one wideband waveform and back.
#[derive(Parser)]
#[command(name = "bandstack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a multi-channel CSV/raw record into a wideband WAV/raw file.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        transform: TransformArgs,
    },
    /// Recover the channels from a wideband file and its sidecar.
    Decode {
        input: PathBuf,
        output: PathBuf,
        /// Original record to report reconstruction error against.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Encode and decode in memory and report the reconstruction error.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        transform: TransformArgs,
        /// Maximum relative error (max abs error / input peak) to pass.
        #[arg(long, default_value_t = 1e-9)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Magnitude STFT of a real wideband file.
    Spectrogram {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1024)]
        window: usize,
        #[arg(long, default_value_t = 768)]
        overlap: usize,
        /// Drop the final frame (513 x 621 for a 10 s, 16 kHz signal).
        #[arg(long)]
        paper_shape: bool,
        /// Log magnitude in dB.
        #[arg(long)]
        log: bool,
    },
    /// Write a synthetic multi-channel record.
    Synth {
        output: PathBuf,
        #[arg(long, short = 'p', default_value_t = 1)]
        channels: usize,
        #[arg(long, short = 'n')]
        samples: usize,
        #[arg(long)]
        rate: f64,
        /// Band-limited Gaussian noise in an EEG band (delta, theta, alpha, sigma, beta, gamma).
        #[arg(long, conflicts_with = "tone")]
        band: Option<EegBand>,
        /// `CHANNEL:FREQ[:AMPLITUDE[:PHASE]]`, channel 1-based; repeatable.
        #[arg(long)]
        tone: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the header of an artifact (sidecar, or CSV dimensions).
    Info { path: PathBuf },
    /// Time the exhaustive and fast bin assignment on the same plan.
    Bench {
        #[arg(long, short = 'p', default_value_t = 30)]
        channels: usize,
        #[arg(long, short = 'n', default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1000.0)]
        rate: f64,
        #[arg(long, default_value_t = 16_000.0)]
        target_rate: f64,
        /// Channels to run the exhaustive search on.
        #[arg(long, default_value_t = 1)]
        oracle_channels: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct TransformArgs {
    /// Input sample rate f_s in Hz (overrides a `# rate_hz=` line).
    #[arg(long)]
    rate: Option<f64>,
    /// Output sample rate F_s in Hz.
    #[arg(long)]
    target_rate: f64,
    #[arg(long, default_value_t = Mode::RealHermitian)]
    mode: Mode,
    /// `identity`, `reverse`, or a 1-based permutation such as `3,1,2`.
    #[arg(long)]
    order: Option<String>,
}

impl TransformArgs {
    fn config(&self, p: usize) -> bandstack::Result<TransformConfig> {
        let config = TransformConfig::new(self.target_rate, self.mode);
        let order = match self.order.as_deref().map(str::trim) {
            None | Some("identity") => return Ok(config),
            Some("reverse") => StackingOrder::reverse(p),
            Some(list) => {
                let parsed = list
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidConfig(format!("cannot parse stacking order {list:?}")))?;
                StackingOrder::from_one_based(&parsed)?
            }
        };
        Ok(config.with_order(order))
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_io() {
        1
    } else if err.is_infeasible() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn read_record(path: &Path, rate: Option<f64>) -> bandstack::Result<MultiChannelRecord> {
    read_multichannel(path, RecordFormat::from_path(path), rate)
}

fn print_plan(plan: &BandPlan) {
    let inputs = plan.inputs();
    println!(
        "plan: p={} N={} f_s={} Hz -> F_s={} Hz, mode {}",
        inputs.channels, inputs.samples, inputs.source_rate_hz, inputs.target_rate_hz, plan.mode()
    );
    println!("  f_band = {:.3} Hz", plan.band_width_hz());
    println!("  N' = {}", plan.wideband_len());
    if inputs.length_residual() != 0.0 {
        println!("  T*F_s - N' = {}", inputs.length_residual());
    }
    println!("  collisions = {}", plan.collision_count());
    println!("  lost bins = {}", plan.losses().len());
    println!(
        "  F_s >= p*f_s ({} Hz): {}",
        inputs.required_rate_hz(),
        plan.meets_rate_bound()
    );
    println!("  exactly lossless: {}", plan.is_lossless());
}

fn run(command: Command) -> bandstack::Result<u8> {
    match command {
        Command::Encode {
            input,
            output,
            transform,
        } => {
            let record = read_record(&input, transform.rate)?;
            let config = transform.config(record.channel_count())?;
            let plan = build_band_plan(record.channel_count(), record.len(), record.sample_rate_hz(), &config)?;
            print_plan(&plan);
            let signal = encode_with_plan(&record, &plan)?;
            write_wideband(&signal, &output, WidebandFormat::from_path(&output))?;
            println!("wrote {} samples to {}", signal.len(), output.display());
            Ok(0)
        }
        Command::Decode {
            input,
            output,
            compare,
        } => {
            let signal = read_wideband(&input)?;
            let record = decode(&signal)?;
            write_multichannel(&record, &output, RecordFormat::from_path(&output))?;
            println!(
                "wrote {} channels x {} samples at {} Hz to {}",
                record.channel_count(),
                record.len(),
                record.sample_rate_hz(),
                output.display()
            );
            if let Some(original) = compare {
                let original = read_record(&original, Some(record.sample_rate_hz()))?;
                let (max_err, rmse) = compare_records(&original, &record)?;
                println!("max_abs_error = {max_err:e}");
                for (c, r) in rmse.iter().enumerate() {
                    println!("  ch{} rmse = {r:e}", c + 1);
                }
            }
            Ok(0)
        }
        Command::Verify {
            input,
            transform,
            threshold,
            json,
        } => {
            let record = read_record(&input, transform.rate)?;
            let config = transform.config(record.channel_count())?;
            let report = roundtrip_report(&record, &config)?;
            let pass = report.relative_error < threshold || report.max_abs_error == 0.0;
            if json {
                let mut value = serde_json::to_value(&report).expect("report serializes");
                value["threshold"] = threshold.into();
                value["pass"] = pass.into();
                println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            } else {
                println!("mode = {}", report.mode);
                println!("max_abs_error = {:e}", report.max_abs_error);
                println!("relative_error = {:e}", report.relative_error);
                for (c, r) in report.per_channel_rmse.iter().enumerate() {
                    println!("  ch{} rmse = {r:e}", c + 1);
                }
                println!("collision_count = {}", report.collision_count);
                println!("lost_bins = {}", report.lost_bins);
                println!("F_s >= p*f_s: {}", report.meets_rate_bound);
                println!("exactly lossless: {}", report.lossless);
                println!("{} (threshold {threshold:e})", if pass { "PASS" } else { "FAIL" });
            }
            Ok(if pass { 0 } else { 3 })
        }
        Command::Spectrogram {
            input,
            output,
            window,
            overlap,
            paper_shape,
            log,
        } => {
            let signal = read_wideband(&input)?;
            let mut options = SpectrogramOptions::new(window, overlap);
            options.paper_shape = paper_shape;
            if log {
                options.scale = MagnitudeScale::Decibel;
            }
            let matrix = spectrogram(&signal, &options)?;
            write_matrix(&matrix, &output, MatrixFormat::from_path(&output), &options.metadata(signal.rate_hz))?;
            let (rows, cols) = matrix.dim();
            println!("{rows} x {cols}");
            Ok(0)
        }
        Command::Synth {
            output,
            channels,
            samples,
            rate,
            band,
            tone,
            seed,
        } => {
            let record = match band {
                Some(band) => {
                    let noise = make_bandnoise(channels, samples, rate, band, seed)?;
                    if noise.truncated {
                        println!("note: {band} band truncated at Nyquist ({} Hz)", rate / 2.0);
                    }
                    noise.record
                }
                None => make_tones(channels, samples, rate, &parse_tones(&tone, channels)?)?,
            };
            write_multichannel(&record, &output, RecordFormat::from_path(&output))?;
            println!(
                "wrote {} channels x {} samples at {} Hz to {}",
                record.channel_count(),
                record.len(),
                rate,
                output.display()
            );
            Ok(0)
        }
        Command::Info { path } => info(&path),
        Command::Bench {
            channels,
            samples,
            rate,
            target_rate,
            oracle_channels,
            json,
        } => {
            let b = compare_stacking(channels, samples, rate, target_rate, oracle_channels)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&b).expect("json"));
            } else {
                println!("plan: p={} N={} N'={}", b.channels, b.samples, b.wideband_len);
                println!("stack_fast ({} channels): {:.6} s", b.channels, b.fast_seconds);
                println!("stack_oracle ({} channels): {:.6} s", b.oracle_channels, b.oracle_seconds);
                println!("stack_oracle projected ({} channels): {:.3} s", b.channels, b.oracle_projected_seconds);
                println!("speedup >= {:.1}x", b.speedup_lower_bound);
                println!("identical assignments: {}", b.identical);
            }
            Ok(if b.identical { 0 } else { 2 })
        }
    }
}

fn parse_tones(specs: &[String], channels: usize) -> bandstack::Result<Vec<Vec<Tone>>> {
    let mut table = vec![Vec::new(); channels];
    for spec in specs {
        let bad = || Error::InvalidConfig(format!("cannot parse tone {spec:?}, expected CHANNEL:FREQ[:AMPLITUDE[:PHASE]]"));
        let parts: Vec<&str> = spec.split(':').collect();
        if !(2..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let channel: usize = parts[0].trim().parse().map_err(|_| bad())?;
        if channel == 0 || channel > channels {
            return Err(Error::InvalidConfig(format!("tone channel {channel} is outside 1..={channels}")));
        }
        let num = |i: usize, default: f64| -> bandstack::Result<f64> {
            parts.get(i).map_or(Ok(default), |s| s.trim().parse().map_err(|_| bad()))
        };
        table[channel - 1].push(Tone::new(num(1, 0.0)?, num(2, 1.0)?, num(3, 0.0)?));
    }
    Ok(table)
}

fn info(path: &Path) -> bandstack::Result<u8> {
    std::fs::metadata(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let is_csv=path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if text.starts_with("# rows=") {
            let (matrix, metadata) = read_matrix(path, MatrixFormat::Csv)?;
            println!("kind: csv matrix");
            println!("{} x {}", matrix.nrows(), matrix.ncols());
            for (k, v) in &metadata {
                println!("{k}={v}");
            }
            return Ok(0);
        }
        let (record, rate_known)=match read_record(path, None) {
            Ok(r) => (r, true),
            Err(Error::Format { .. }) => (read_record(path, Some(1.0))?, false),
            Err(e) => return Err(e),
        };
        println!("kind: csv record");
        println!("p={}", record.channel_count());
        println!("N={}", record.len());
        if rate_known {
            println!("f_s={} Hz", record.sample_rate_hz());
        } else {
            println!("f_s=unknown");
        }
        return Ok(0);
    }
    match read_sidecar(path)? {
        Sidecar::Wideband(h) => {
            println!("kind: wideband ({:?})", h.data_format);
            println!("format_version={}", h.format_version);
            println!("p={}", h.channels);
            println!("N={}", h.samples_per_channel);
            println!("f_s={} Hz", h.source_rate_hz);
            println!("F_s={} Hz", h.target_rate_hz);
            println!("N'={}", h.wideband_samples);
            println!("mode={}", h.mode);
            let order: Vec<String>=h.stacking_order.iter().map(usize::to_string).collect();
            println!("stacking_order={}", order.join(","));
            println!("scale={}", h.scale);
            println!("collision_count={}", h.collision_count);
            println!("exactly lossless: {}", h.lossless);
            if let Some(names)=&h.channel_names {
                println!("channel_names={}", names.join(","));
            }
        }
        Sidecar::Multichannel(h) => {
            println!("kind: multichannel record");
            println!("format_version={}", h.format_version);
            println!("p={}", h.channels);
            println!("N={}", h.samples_per_channel);
            println!("f_s={} Hz", h.sample_rate_hz);
        }
        Sidecar::Matrix(h) => {
            println!("kind: matrix");
            println!("format_version={}", h.format_version);
            println!("{} x {}", h.rows, h.cols);
            for (k, v) in &h.metadata {
                println!("{k}={v}");
            }
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(order: Option<&str>) -> TransformArgs {
        TransformArgs {
            rate: None,
            target_rate: 4000.0,
            mode: Mode::RealHermitian,
            order: order.map(str::to_owned),
        }
    }

    #[test]
    fn order_arguments() {
        assert!(args(None).config(3).unwrap().stacking_order.is_none());
        assert!(args(Some(" identity ")).config(3).unwrap().stacking_order.is_none());
        let rev = args(Some("reverse")).config(3).unwrap().stacking_order.unwrap();
        assert_eq!(rev.to_one_based(), vec![3, 2, 1]);
        let list = args(Some("2, 3,1")).config(3).unwrap().stacking_order.unwrap();
        assert_eq!(list.to_one_based(), vec![2, 3, 1]);
        assert!(args(Some("1,x")).config(2).is_err());
        assert!(args(Some("1,1")).config(2).is_err());
    }

    #[test]
    fn tone_arguments() {
        let t = parse_tones(&["2:10".into(), "1:5:0.5:1.25".into(), "2:7:2".into()], 2).unwrap();
        assert_eq!(t[0].len(), 1);
        assert_eq!((t[0][0].freq_hz, t[0][0].amplitude, t[0][0].phase), (5.0, 0.5, 1.25));
        assert_eq!((t[1][0].freq_hz, t[1][0].amplitude, t[1][0].phase), (10.0, 1.0, 0.0));
        assert_eq!((t[1][1].freq_hz, t[1][1].amplitude), (7.0, 2.0));
        for bad in ["3:1", "0:1", "1", "1:a", "1:1:1:1:1"] {
            assert!(parse_tones(&[bad.into()], 2).is_err(), "{bad}");
        }
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        };
        assert_eq!(exit_code(&io), 1);
        assert_eq!(exit_code(&Error::NoChannels), 2);
        assert_eq!(exit_code(&Error::BelowRateBound { required: 2.0, target: 1.0 }), 3);
    }
}
