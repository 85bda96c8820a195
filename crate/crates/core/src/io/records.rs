use std::path::Path;

use super::sidecar::{read_sidecar, write_sidecar, RecordHeader, Sidecar};
use super::{read_f64_le, write_f64_le};
use crate::error::{Error, Result};
use crate::model::{MultiChannelRecord, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    /// One column per channel, optional header row, optional `# rate_hz=` line.
    Csv,
    /// Channel-major little-endian doubles with a sidecar giving dimensions.
    RawF64,
}

impl RecordFormat {
    pub fn from_path(path: &Path) -> Self {
        if super::has_extension(path, "csv") {
            RecordFormat::Csv
        } else {
            RecordFormat::RawF64
        }
    }
}

/// Reads a record. `rate_hz` overrides any rate stored in the file.
pub fn read_multichannel(path: &Path, format: RecordFormat, rate_hz: Option<f64>) -> Result<MultiChannelRecord> {
    match format {
        RecordFormat::Csv => read_csv(path, rate_hz),
        RecordFormat::RawF64 => read_raw(path, rate_hz),
    }
}

pub fn write_multichannel(record: &MultiChannelRecord, path: &Path, format: RecordFormat) -> Result<()> {
    match format {
        RecordFormat::Csv => write_csv(record, path),
        RecordFormat::RawF64 => {
            write_f64_le(path, record.channels().iter().flatten())?;
            write_sidecar(
                path,
                &Sidecar::Multichannel(RecordHeader {
                    format_version: FORMAT_VERSION,
                    channels: record.channel_count(),
                    samples_per_channel: record.len(),
                    sample_rate_hz: record.sample_rate_hz(),
                    channel_names: record.names().map(<[String]>::to_vec),
                }),
            )
        }
    }
}

fn read_raw(path: &Path, rate_hz: Option<f64>) -> Result<MultiChannelRecord> {
    let header = match read_sidecar(path)? {
        Sidecar::Multichannel(h) => h,
        _ => return Err(Error::format(path, "sidecar does not describe a multi-channel record")),
    };
    let values = read_f64_le(path, header.channels * header.samples_per_channel)?;
    let channels = if header.samples_per_channel == 0 {
        vec![Vec::new(); header.channels]
    } else {
        values
            .chunks_exact(header.samples_per_channel)
            .map(<[f64]>::to_vec)
            .collect()
    };
    let record = MultiChannelRecord::new(channels, rate_hz.unwrap_or(header.sample_rate_hz))?;
    match header.channel_names {
        Some(names) => record.with_names(names),
        None => Ok(record),
    }
}

/// Value of `rate_hz=` in a `#` comment line, if present.
fn rate_from_comment(line: &str) -> Option<&str> {
    line.trim_start_matches('#')
        .split(|c: char| c.is_whitespace() || c == ',')
        .find_map(|kv| kv.trim().strip_prefix("rate_hz="))
}

fn read_csv(path: &Path, rate_hz: Option<f64>) -> Result<MultiChannelRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut file_rate = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            if let Some(v) = rate_from_comment(line.trim_start()) {
                let parsed = v.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 1,
                    column: 1,
                    message: format!("invalid rate_hz value {v:?}"),
                })?;
                file_rate = Some(parsed);
            }
        }
    }
    let rate = rate_hz.or(file_rate).ok_or_else(|| {
        Error::format(path, "missing sample rate: pass a rate or add a '# rate_hz=...' line")
    })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names: Option<Vec<String>> = None;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                path: path.to_path_buf(),
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed: Vec<std::result::Result<f64, _>> = row.iter().map(str::parse::<f64>).collect();
        if row_index == 0 && parsed.iter().all(|r| r.is_err()) {
            names = Some(row.iter().map(str::to_string).collect());
            continue;
        }
        if channels.is_empty() {
            channels = vec![Vec::new(); row.len()];
        }
        for (column, (cell, value)) in row.iter().zip(parsed).enumerate() {
            let value = value.map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                column: column + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            channels[column].push(value);
        }
    }
    if channels.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let record = MultiChannelRecord::new(channels, rate)?;
    match names {
        Some(n) if n.len() == record.channel_count() => record.with_names(n),
        Some(n) => Err(Error::format(
            path,
            format!("header has {} names for {} columns", n.len(), record.channel_count()),
        )),
        None => Ok(record),
    }
}

fn write_csv(record: &MultiChannelRecord, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(record.len() * record.channel_count() * 20);
    out.push_str(&format!("# rate_hz={}\n", record.sample_rate_hz()));
    let names: Vec<String> = match record.names() {
        Some(n) => n.to_vec(),
        None => (1..=record.channel_count()).map(|c| format!("ch{c}")).collect(),
    };
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(&names).map_err(|e| Error::format(path, e.to_string()))?;
    let mut row = Vec::with_capacity(record.channel_count());
    for n in 0..record.len() {
        row.clear();
        row.extend(record.channels().iter().map(|c| c[n].to_string()));
        writer.write_record(&row).map_err(|e| Error::format(path, e.to_string()))?;
    }
    let body = writer.into_inner().map_err(|e| Error::format(path, e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
