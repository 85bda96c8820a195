use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mode, Provenance, StackingOrder, FORMAT_VERSION};

/// `<path>.sidecar`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sidecar");
    PathBuf::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    WavF32,
    RawF64,
}

/// Header of a wideband signal file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarHeader {
    pub format_version: u32,
    pub data_format: DataFormat,
    /// 1 for real samples; 2 for complex (real plane, then imaginary plane).
    pub planes: usize,
    pub channels: usize,
    pub samples_per_channel: usize,
    pub source_rate_hz: f64,
    pub target_rate_hz: f64,
    pub wideband_samples: usize,
    pub mode: Mode,
    /// 1-based channel numbers, bottom band first.
    pub stacking_order: Vec<usize>,
    pub scale: f64,
    pub collision_count: usize,
    pub lossless: bool,
    pub length_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_names: Option<Vec<String>>,
}

impl SidecarHeader {
    pub fn from_provenance(prov: &Provenance, data_format: DataFormat, wideband_samples: usize) -> Self {
        Self {
            format_version: prov.format_version,
            data_format,
            planes: if prov.mode.is_real() { 1 } else { 2 },
            channels: prov.channels,
            samples_per_channel: prov.samples_per_channel,
            source_rate_hz: prov.source_rate_hz,
            target_rate_hz: prov.target_rate_hz,
            wideband_samples,
            mode: prov.mode,
            stacking_order: prov.stacking_order.to_one_based(),
            scale: prov.scale,
            collision_count: prov.collision_count,
            lossless: prov.lossless,
            length_residual: prov.length_residual,
            channel_names: prov.channel_names.clone(),
        }
    }

    pub fn to_provenance(&self) -> Result<Provenance> {
        let expected_planes = if self.mode.is_real() { 1 } else { 2 };
        if self.planes != expected_planes {
            return Err(Error::Provenance(format!(
                "{} planes recorded for mode {}",
                self.planes, self.mode
            )));
        }
        if let Some(names) = &self.channel_names {
            if names.len() != self.channels {
                return Err(Error::Provenance(format!(
                    "{} channel names for {} channels",
                    names.len(),
                    self.channels
                )));
            }
        }
        Ok(Provenance {
            format_version: self.format_version,
            channels: self.channels,
            samples_per_channel: self.samples_per_channel,
            source_rate_hz: self.source_rate_hz,
            target_rate_hz: self.target_rate_hz,
            mode: self.mode,
            stacking_order: StackingOrder::from_one_based(&self.stacking_order)
                .map_err(|e| Error::Provenance(e.to_string()))?,
            scale: self.scale,
            collision_count: self.collision_count,
            lossless: self.lossless,
            length_residual: self.length_residual,
            channel_names: self.channel_names.clone(),
        })
    }
}

/// Header of a raw multi-channel record (channel-major doubles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordHeader {
    pub format_version: u32,
    pub channels: usize,
    pub samples_per_channel: usize,
    pub sample_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_names: Option<Vec<String>>,
}

/// Header of a raw row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixHeader {
    pub format_version: u32,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sidecar {
    Wideband(SidecarHeader),
    Multichannel(RecordHeader),
    Matrix(MatrixHeader),
}

impl Sidecar {
    pub fn format_version(&self) -> u32 {
        match self {
            Sidecar::Wideband(h) => h.format_version,
            Sidecar::Multichannel(h) => h.format_version,
            Sidecar::Matrix(h) => h.format_version,
        }
    }
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let target = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    text.push('\n');
    std::fs::write(&target, text).map_err(|e| Error::io(&target, e))
}

/// Reads the sidecar belonging to `path`, or `path` itself if it already
/// names a `.sidecar` file.
pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let target = if super::has_extension(path, "sidecar") {
        path.to_path_buf()
    } else {
        sidecar_path(path)
    };
    let text = match std::fs::read_to_string(&target) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && target != path => {
            return Err(Error::MissingSidecar { path: target });
        }
        Err(e) => return Err(Error::io(&target, e)),
    };
    parse_sidecar(&target, &text)
}

pub(crate) fn parse_sidecar(path: &Path, text: &str) -> Result<Sidecar> {
    let bad = |e: serde_json::Error| Error::format(path, format!("invalid sidecar: {e}"));
    // check the version before the schema so old/new files get a clear error
    let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::format(path, "sidecar has no integer format_version"))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(bad)
}
