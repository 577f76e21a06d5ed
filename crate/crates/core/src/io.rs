//! File formats: JSON configs, CSV/raw signals, coefficient envelopes,
//! and report serialization.
//!
//! Partition config:
//! `{"variant":"standard|starred","points":[...],"leftInfinite":bool,"rightInfinite":bool}`.
//! Wavelet config:
//! `{"kind":"shannon|meyer|gaussian|custom","params":{...},"delta":0.01}`.
//! Signals travel as CSV `(t, re, im)` or raw little-endian interleaved
//! f64 pairs next to a JSON sidecar `{"sampleInterval":..,"length":..}`.

use std::fs;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::BoundarySet;
use crate::signal::{SampledSignal, SignalError};
use crate::system::{CoeffMode, CoefficientSet, ShiftRule, SystemOptions};
use crate::wavelet::{MotherWavelet, WaveletError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("raw signal length {found} bytes does not match sidecar length {expected}")]
    RawLengthMismatch { expected: usize, found: usize },
}

fn default_delta() -> f64 {
    0.01
}

/// Wavelet selection; `custom` points at a `(xi, re, im)` CSV that is
/// linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum WaveletKindConfig {
    Shannon,
    Meyer { transition: f64 },
    Gaussian,
    Custom { samples: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletConfig {
    #[serde(flatten)]
    pub kind: WaveletKindConfig,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl WaveletConfig {
    /// Instantiate the mother wavelet; relative custom-sample paths
    /// resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<MotherWavelet, FormatError> {
        let wavelet = match &self.kind {
            WaveletKindConfig::Shannon => MotherWavelet::shannon(),
            WaveletKindConfig::Meyer { transition } => MotherWavelet::meyer(*transition)?,
            WaveletKindConfig::Gaussian => MotherWavelet::gaussian(),
            WaveletKindConfig::Custom { samples } => {
                let path = if samples.is_absolute() {
                    samples.clone()
                } else {
                    base_dir.join(samples)
                };
                let rows = read_numeric_csv(&path, 3)?;
                let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                let values: Vec<Complex64> =
                    rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
                let w = MotherWavelet::from_samples(xs, values)?;
                w.validate_support(1 << 14)?;
                w
            }
        };
        Ok(wavelet.with_essential(self.delta)?)
    }
}

/// Shift-rule selection mirroring [`ShiftRule`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[derive(Default)]
pub enum ShiftRuleConfig {
    #[default]
    Reciprocal,
    ReciprocalWithMargin { margin: f64 },
    Explicit(Vec<f64>),
    /// `[numerator, denominator]` pairs evaluated exactly.
    ExplicitRational(Vec<[i64; 2]>),
}


impl ShiftRuleConfig {
    pub fn to_rule(&self) -> ShiftRule {
        match self {
            ShiftRuleConfig::Reciprocal => ShiftRule::ReciprocalSupport { margin: None },
            ShiftRuleConfig::ReciprocalWithMargin { margin } => {
                ShiftRule::ReciprocalSupport { margin: Some(*margin) }
            }
            ShiftRuleConfig::Explicit(v) => ShiftRule::Explicit(v.clone()),
            ShiftRuleConfig::ExplicitRational(v) => ShiftRule::ExplicitRational(
                v.iter().map(|[p, q]| num_rational::Ratio::new(*p, *q)).collect(),
            ),
        }
    }
}

fn default_overlap() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SystemConfig {
    #[serde(default)]
    pub shift_rule: ShiftRuleConfig,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig { shift_rule: ShiftRuleConfig::default(), overlap: 1.0 }
    }
}

impl SystemConfig {
    pub fn to_options(&self) -> SystemOptions {
        SystemOptions { shift_rule: self.shift_rule.to_rule(), overlap: self.overlap }
    }
}

pub fn read_partition_config(path: &Path) -> Result<BoundarySet, FormatError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_partition_config(path: &Path, set: &BoundarySet) -> Result<(), FormatError> {
    fs::write(path, serde_json::to_string_pretty(set)?)?;
    Ok(())
}

pub fn read_wavelet_config(path: &Path) -> Result<WaveletConfig, FormatError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Parse a CSV of fixed-width numeric rows, tolerating one header line.
pub fn read_numeric_csv(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) if row.len() == columns => rows.push(row),
            Ok(row) => {
                return Err(FormatError::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("expected {columns} columns, found {}", row.len()),
                })
            }
            Err(e) => {
                if i == 0 {
                    continue; // header row
                }
                return Err(FormatError::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

/// Read a `(frequency, magnitude)` spectrum CSV.
pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
    let rows = read_numeric_csv(path, 2)?;
    Ok((rows.iter().map(|r| r[0]).collect(), rows.iter().map(|r| r[1]).collect()))
}

/// Sidecar metadata for raw signal files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawSidecar {
    pub sample_interval: f64,
    pub length: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Read a signal: `.csv` as `(t, re, im)` rows, anything else as raw
/// interleaved little-endian f64 pairs with a `<file>.json` sidecar.
pub fn read_signal(path: &Path) -> Result<SampledSignal, FormatError> {
    if path.extension().is_some_and(|e| e == "csv") {
        let rows = read_numeric_csv(path, 3)?;
        if rows.len() < 2 {
            return Err(FormatError::Parse {
                path: path.display().to_string(),
                line: rows.len(),
                message: "signal needs at least 2 samples".to_string(),
            });
        }
        let dt = rows[1][0] - rows[0][0];
        let samples = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        Ok(SampledSignal::new(samples, dt)?)
    } else {
        let sidecar: RawSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
        let bytes = fs::read(path)?;
        if bytes.len() != sidecar.length * 16 {
            return Err(FormatError::RawLengthMismatch {
                expected: sidecar.length * 16,
                found: bytes.len(),
            });
        }
        let samples = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        Ok(SampledSignal::new(samples, sidecar.sample_interval)?)
    }
}

pub fn write_signal(path: &Path, signal: &SampledSignal) -> Result<(), FormatError> {
    if path.extension().is_some_and(|e| e == "csv") {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["t", "re", "im"])?;
        for (i, s) in signal.samples.iter().enumerate() {
            let t = i as f64 * signal.sample_interval;
            writer.write_record([format!("{t:.17e}"), format!("{:.17e}", s.re), format!("{:.17e}", s.im)])?;
        }
        writer.flush()?;
    } else {
        let mut bytes = Vec::with_capacity(signal.len() * 16);
        for s in &signal.samples {
            bytes.extend_from_slice(&s.re.to_le_bytes());
            bytes.extend_from_slice(&s.im.to_le_bytes());
        }
        fs::write(path, bytes)?;
        let sidecar = RawSidecar { sample_interval: signal.sample_interval, length: signal.len() };
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    }
    Ok(())
}

/// JSON envelope for coefficient sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientEnvelope {
    pub mode: String,
    pub signal_length: usize,
    pub sample_interval: f64,
    pub bands: Vec<BandEnvelope>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandEnvelope {
    pub n: i32,
    pub bn: f64,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&CoefficientSet> for CoefficientEnvelope {
    fn from(set: &CoefficientSet) -> Self {
        CoefficientEnvelope {
            mode: match set.mode {
                CoeffMode::ContinuousGrid => "cewt".to_string(),
                CoeffMode::Discrete => "dewt".to_string(),
            },
            signal_length: set.signal_len,
            sample_interval: set.sample_interval,
            bands: set
                .bands
                .iter()
                .map(|b| BandEnvelope {
                    n: b.index,
                    bn: b.shift_step,
                    coeffs: b.values.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
    }
}

impl CoefficientEnvelope {
    pub fn to_set(&self) -> CoefficientSet {
        CoefficientSet {
            mode: if self.mode == "cewt" {
                CoeffMode::ContinuousGrid
            } else {
                CoeffMode::Discrete
            },
            signal_len: self.signal_length,
            sample_interval: self.sample_interval,
            bands: self
                .bands
                .iter()
                .map(|b| crate::system::BandCoefficients {
                    index: b.n,
                    shift_step: b.bn,
                    values: b.coeffs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                })
                .collect(),
        }
    }
}

pub fn write_coefficients(path: &Path, set: &CoefficientSet) -> Result<(), FormatError> {
    let envelope = CoefficientEnvelope::from(set);
    fs::write(path, serde_json::to_string(&envelope)?)?;
    Ok(())
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientSet, FormatError> {
    let envelope: CoefficientEnvelope = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(envelope.to_set())
}

/// Per-band CSV dump `(k, re, im)`, one file per band.
pub fn write_coefficients_csv(dir: &Path, set: &CoefficientSet) -> Result<Vec<PathBuf>, FormatError> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for band in &set.bands {
        let path = dir.join(format!("band_{}.csv", band.index));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(["k", "re", "im"])?;
        for (k, c) in band.values.iter().enumerate() {
            writer.write_record([k.to_string(), format!("{:.17e}", c.re), format!("{:.17e}", c.im)])?;
        }
        writer.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
