//! EDF/EDF+ container parsing and the resting-state dataset catalog.
//!
//! Layout: a 256-byte fixed-width ASCII global header, `256 * n_signals`
//! bytes of per-signal headers stored field-major (all labels, then all
//! transducers, ...), then data records holding each signal's samples as
//! contiguous runs of 16-bit little-endian two's-complement integers.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use thiserror::Error;

/// Label of the EDF+ annotation stream, which is never EEG.
pub const ANNOTATION_LABEL: &str = "EDF Annotations";
/// Sample rate of the EEG motor movement/imagery recordings.
pub const DATASET_SAMPLE_RATE: f64 = 160.0;
/// EEG channel count of the same recordings.
pub const DATASET_CHANNELS: usize = 64;

const GLOBAL_HEADER_BYTES: usize = 256;
const SIGNAL_HEADER_BYTES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdfError {
    #[error("truncated file at byte {offset}: need {needed} bytes, have {available}")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("header size mismatch at byte {offset}: declared {declared}, expected {expected} for {n_signals} signals")]
    HeaderSizeMismatch {
        offset: usize,
        declared: usize,
        expected: usize,
        n_signals: usize,
    },
    #[error("non-numeric value {text:?} in field `{field}` at byte {offset}")]
    InvalidNumber {
        offset: usize,
        field: &'static str,
        text: String,
    },
    #[error("invalid header at byte {offset}: {reason}")]
    InvalidHeader { offset: usize, reason: String },
    #[error("signal {index} ({label:?}): {reason}")]
    InvalidSignal {
        index: usize,
        label: String,
        reason: String,
    },
    #[error("field `{field}` value {text:?} does not fit in {width} bytes")]
    FieldOverflow {
        field: &'static str,
        text: String,
        width: usize,
    },
    #[error("recording: {0}")]
    InvalidRecording(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient_id: String,
    pub recording_id: String,
    pub start_date: String,
    pub start_time: String,
    pub header_bytes: usize,
    /// Reserved area; EDF+ stores "EDF+C"/"EDF+D" here.
    pub reserved: String,
    /// Number of data records. A declared `-1` is resolved from the file size.
    pub n_data_records: usize,
    pub record_duration_s: f64,
    pub n_signals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
    pub reserved: String,
}

impl SignalSpec {
    pub fn gain(&self) -> f64 {
        (self.physical_max - self.physical_min) / f64::from(self.digital_max - self.digital_min)
    }

    pub fn sample_rate(&self, record_duration_s: f64) -> f64 {
        self.samples_per_record as f64 / record_duration_s
    }

    pub fn is_annotation(&self) -> bool {
        self.label.trim() == ANNOTATION_LABEL
    }

    fn validate(&self, index: usize) -> Result<(), EdfError> {
        let fail = |reason: String| EdfError::InvalidSignal {
            index,
            label: self.label.clone(),
            reason,
        };
        if self.digital_min >= self.digital_max {
            return Err(fail(format!(
                "digital_min {} >= digital_max {}",
                self.digital_min, self.digital_max
            )));
        }
        if !(self.physical_min.is_finite() && self.physical_max.is_finite())
            || self.physical_min == self.physical_max
        {
            return Err(fail(format!(
                "degenerate physical range [{}, {}]",
                self.physical_min, self.physical_max
            )));
        }
        let gain = self.gain();
        if !gain.is_finite() || gain == 0.0 {
            return Err(fail(format!("gain {gain} is not finite and nonzero")));
        }
        if self.samples_per_record == 0 {
            return Err(fail("zero samples per record".into()));
        }
        Ok(())
    }
}

/// A fully decoded EDF file image with raw digital samples per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfFile {
    pub header: EdfHeader,
    pub signals: Vec<SignalSpec>,
    /// `digital[s]` holds `n_data_records * samples_per_record` samples.
    pub digital: Vec<Vec<i16>>,
    /// Bytes found after the last complete data record.
    pub trailing_bytes: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, width: usize) -> Result<(usize, &'a str), EdfError> {
        let start = self.pos;
        let end = start + width;
        if end > self.bytes.len() {
            return Err(EdfError::Truncated {
                offset: start,
                needed: end,
                available: self.bytes.len(),
            });
        }
        self.pos = end;
        let raw = &self.bytes[start..end];
        let text = std::str::from_utf8(raw).map_err(|_| EdfError::InvalidHeader {
            offset: start,
            reason: "non-ASCII bytes in header".into(),
        })?;
        Ok((start, text))
    }

    fn text(&mut self, width: usize) -> Result<String, EdfError> {
        Ok(self.take(width)?.1.trim_end().to_string())
    }

    fn number<T: std::str::FromStr>(
        &mut self,
        width: usize,
        field: &'static str,
    ) -> Result<T, EdfError> {
        let (offset, raw) = self.take(width)?;
        parse_field(raw, offset, field)
    }
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    offset: usize,
    field: &'static str,
) -> Result<T, EdfError> {
    let trimmed = raw.trim_matches(' ');
    trimmed.parse().map_err(|_| EdfError::InvalidNumber {
        offset,
        field,
        text: raw.to_string(),
    })
}

/// Decodes the global and per-signal headers.
pub fn parse_header(bytes: &[u8]) -> Result<(EdfHeader, Vec<SignalSpec>, Option<i64>), EdfError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let version = cur.text(8)?;
    let patient_id = cur.text(80)?;
    let recording_id = cur.text(80)?;
    let start_date = cur.text(8)?;
    let start_time = cur.text(8)?;
    let header_offset = cur.pos;
    let header_bytes: usize = cur.number(8, "header_bytes")?;
    let reserved = cur.text(44)?;
    let records_offset = cur.pos;
    let declared_records: i64 = cur.number(8, "n_data_records")?;
    let duration_offset = cur.pos;
    let record_duration_s: f64 = cur.number(8, "record_duration")?;
    let n_signals: usize = cur.number(4, "n_signals")?;

    let expected = GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * n_signals;
    if header_bytes != expected {
        return Err(EdfError::HeaderSizeMismatch {
            offset: header_offset,
            declared: header_bytes,
            expected,
            n_signals,
        });
    }
    if n_signals == 0 {
        return Err(EdfError::InvalidHeader {
            offset: 252,
            reason: "no signals".into(),
        });
    }
    if !(record_duration_s > 0.0 && record_duration_s.is_finite()) {
        return Err(EdfError::InvalidHeader {
            offset: duration_offset,
            reason: format!("record duration {record_duration_s} must be positive"),
        });
    }
    if declared_records < -1 || declared_records == 0 {
        return Err(EdfError::InvalidHeader {
            offset: records_offset,
            reason: format!("data record count {declared_records}"),
        });
    }

    let mut labels = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        labels.push(cur.text(16)?);
    }
    let mut transducers = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        transducers.push(cur.text(80)?);
    }
    let mut dimensions = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        dimensions.push(cur.text(8)?);
    }
    let mut phys_min = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        phys_min.push(cur.number::<f64>(8, "physical_min")?);
    }
    let mut phys_max = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        phys_max.push(cur.number::<f64>(8, "physical_max")?);
    }
    let mut dig_min = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        dig_min.push(cur.number::<i32>(8, "digital_min")?);
    }
    let mut dig_max = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        dig_max.push(cur.number::<i32>(8, "digital_max")?);
    }
    let mut prefilter = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        prefilter.push(cur.text(80)?);
    }
    let mut spr = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        spr.push(cur.number::<usize>(8, "samples_per_record")?);
    }
    let mut sig_reserved = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        sig_reserved.push(cur.text(32)?);
    }

    let mut signals = Vec::with_capacity(n_signals);
    for i in 0..n_signals {
        let spec = SignalSpec {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dimension: dimensions[i].clone(),
            physical_min: phys_min[i],
            physical_max: phys_max[i],
            digital_min: dig_min[i],
            digital_max: dig_max[i],
            prefiltering: prefilter[i].clone(),
            samples_per_record: spr[i],
            reserved: sig_reserved[i].clone(),
        };
        spec.validate(i)?;
        signals.push(spec);
    }

    let header = EdfHeader {
        version,
        patient_id,
        recording_id,
        start_date,
        start_time,
        header_bytes,
        reserved,
        n_data_records: declared_records.max(0) as usize,
        record_duration_s,
        n_signals,
    };
    let declared = (declared_records >= 0).then_some(declared_records);
    Ok((header, signals, declared))
}

/// Parses a complete EDF file image.
pub fn parse_edf(bytes: &[u8]) -> Result<EdfFile, EdfError> {
    let (mut header, signals, declared) = parse_header(bytes)?;
    let record_samples: usize = signals.iter().map(|s| s.samples_per_record).sum();
    let record_bytes = record_samples * 2;
    let data = &bytes[header.header_bytes..];

    let n_records = match declared {
        Some(n) => n as usize,
        None => {
            let n = data.len() / record_bytes;
            if n == 0 {
                return Err(EdfError::InvalidHeader {
                    offset: 236,
                    reason: "record count unknown and no complete data record present".into(),
                });
            }
            n
        }
    };
    header.n_data_records = n_records;

    let needed = n_records * record_bytes;
    if data.len() < needed {
        return Err(EdfError::Truncated {
            offset: header.header_bytes + data.len(),
            needed: header.header_bytes + needed,
            available: bytes.len(),
        });
    }
    let trailing_bytes = data.len() - needed;
    if trailing_bytes > 0 {
        warn!("ignoring {trailing_bytes} trailing bytes after the last data record");
    }

    let mut digital: Vec<Vec<i16>> = signals
        .iter()
        .map(|s| Vec::with_capacity(s.samples_per_record * n_records))
        .collect();
    for record in data[..needed].chunks_exact(record_bytes) {
        let mut pos = 0;
        for (spec, out) in signals.iter().zip(digital.iter_mut()) {
            let run = &record[pos..pos + spec.samples_per_record * 2];
            out.extend(
                run.chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]])),
            );
            pos += run.len();
        }
    }

    Ok(EdfFile {
        header,
        signals,
        digital,
        trailing_bytes,
    })
}

fn put_field(
    out: &mut Vec<u8>,
    field: &'static str,
    text: &str,
    width: usize,
) -> Result<(), EdfError> {
    if text.len() > width || !text.is_ascii() {
        return Err(EdfError::FieldOverflow {
            field,
            text: text.to_string(),
            width,
        });
    }
    out.extend_from_slice(text.as_bytes());
    out.extend(std::iter::repeat_n(b' ', width - text.len()));
    Ok(())
}

/// Serializes an EDF image. `header_bytes` and `n_signals` are recomputed
/// from `signals`; `n_data_records` must agree with the sample vectors.
pub fn write_edf(
    header: &EdfHeader,
    signals: &[SignalSpec],
    digital: &[Vec<i16>],
) -> Result<Vec<u8>, EdfError> {
    let ns = signals.len();
    if digital.len() != ns {
        return Err(EdfError::InvalidRecording(format!(
            "{} sample vectors for {ns} signals",
            digital.len()
        )));
    }
    for (i, (spec, samples)) in signals.iter().zip(digital).enumerate() {
        spec.validate(i)?;
        if samples.len() != spec.samples_per_record * header.n_data_records {
            return Err(EdfError::InvalidSignal {
                index: i,
                label: spec.label.clone(),
                reason: format!(
                    "{} samples, expected {} records x {}",
                    samples.len(),
                    header.n_data_records,
                    spec.samples_per_record
                ),
            });
        }
    }

    let header_bytes = GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * ns;
    let mut out = Vec::with_capacity(header_bytes);
    put_field(&mut out, "version", &header.version, 8)?;
    put_field(&mut out, "patient_id", &header.patient_id, 80)?;
    put_field(&mut out, "recording_id", &header.recording_id, 80)?;
    put_field(&mut out, "start_date", &header.start_date, 8)?;
    put_field(&mut out, "start_time", &header.start_time, 8)?;
    put_field(&mut out, "header_bytes", &header_bytes.to_string(), 8)?;
    put_field(&mut out, "reserved", &header.reserved, 44)?;
    put_field(
        &mut out,
        "n_data_records",
        &header.n_data_records.to_string(),
        8,
    )?;
    put_field(
        &mut out,
        "record_duration",
        &header.record_duration_s.to_string(),
        8,
    )?;
    put_field(&mut out, "n_signals", &ns.to_string(), 4)?;

    for s in signals {
        put_field(&mut out, "label", &s.label, 16)?;
    }
    for s in signals {
        put_field(&mut out, "transducer", &s.transducer, 80)?;
    }
    for s in signals {
        put_field(&mut out, "physical_dimension", &s.physical_dimension, 8)?;
    }
    for s in signals {
        put_field(&mut out, "physical_min", &s.physical_min.to_string(), 8)?;
    }
    for s in signals {
        put_field(&mut out, "physical_max", &s.physical_max.to_string(), 8)?;
    }
    for s in signals {
        put_field(&mut out, "digital_min", &s.digital_min.to_string(), 8)?;
    }
    for s in signals {
        put_field(&mut out, "digital_max", &s.digital_max.to_string(), 8)?;
    }
    for s in signals {
        put_field(&mut out, "prefiltering", &s.prefiltering, 80)?;
    }
    for s in signals {
        put_field(
            &mut out,
            "samples_per_record",
            &s.samples_per_record.to_string(),
            8,
        )?;
    }
    for s in signals {
        put_field(&mut out, "signal_reserved", &s.reserved, 32)?;
    }
    debug_assert_eq!(out.len(), header_bytes);

    for r in 0..header.n_data_records {
        for (spec, samples) in signals.iter().zip(digital) {
            let n = spec.samples_per_record;
            for v in &samples[r * n..(r + 1) * n] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Affine digital-to-physical conversion for one signal. Values outside
/// `[digital_min, digital_max]` are clamped; the return carries the number
/// of clamped samples.
pub fn to_physical_signal(
    digital: &[i16],
    spec: &SignalSpec,
) -> Result<(Vec<f64>, usize), EdfError> {
    if spec.digital_max <= spec.digital_min {
        return Err(EdfError::InvalidSignal {
            index: 0,
            label: spec.label.clone(),
            reason: "zero digital range".into(),
        });
    }
    let dmin = spec.digital_min;
    let dmax = spec.digital_max;
    let span = f64::from(dmax - dmin);
    let range = spec.physical_max - spec.physical_min;
    let mut clamped = 0;
    let out = digital
        .iter()
        .map(|&d| {
            let d = i32::from(d);
            let d = if d < dmin || d > dmax {
                clamped += 1;
                d.clamp(dmin, dmax)
            } else {
                d
            };
            if d == dmax {
                spec.physical_max
            } else {
                spec.physical_min + f64::from(d - dmin) * range / span
            }
        })
        .collect();
    Ok((out, clamped))
}

/// Converts every signal of a digital matrix to physical units.
pub fn to_physical(
    digital: &[Vec<i16>],
    specs: &[SignalSpec],
) -> Result<(Vec<Vec<f64>>, usize), EdfError> {
    let mut total = 0;
    let mut out = Vec::with_capacity(specs.len());
    for (i, (d, spec)) in digital.iter().zip(specs).enumerate() {
        let (phys, clamped) = to_physical_signal(d, spec).map_err(|e| match e {
            EdfError::InvalidSignal { label, reason, .. } => EdfError::InvalidSignal {
                index: i,
                label,
                reason,
            },
            other => other,
        })?;
        total += clamped;
        out.push(phys);
    }
    Ok((out, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    EyesOpen,
    EyesClosed,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::EyesOpen, Condition::EyesClosed];

    pub fn short(self) -> &'static str {
        match self {
            Condition::EyesOpen => "EO",
            Condition::EyesClosed => "EC",
        }
    }

    /// Baseline run number in the EEG-MMI layout.
    pub fn run(self) -> u32 {
        match self {
            Condition::EyesOpen => 1,
            Condition::EyesClosed => 2,
        }
    }

    pub fn from_run(run: u32) -> Option<Self> {
        match run {
            1 => Some(Condition::EyesOpen),
            2 => Some(Condition::EyesClosed),
            _ => None,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eo" | "eyesopen" | "eyes_open" | "eyes-open" => Ok(Condition::EyesOpen),
            "ec" | "eyesclosed" | "eyes_closed" | "eyes-closed" => Ok(Condition::EyesClosed),
            other => Err(format!("unknown condition {other:?} (expected EO or EC)")),
        }
    }
}

/// One subject/condition recording in physical units (µV), EEG channels only.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub condition: Condition,
    pub sample_rate: f64,
    pub channel_labels: Vec<String>,
    /// channels x samples
    pub data: Vec<Vec<f64>>,
}

impl Recording {
    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    /// Builds a recording from a parsed file, dropping annotation streams.
    pub fn from_edf(
        edf: &EdfFile,
        subject_id: &str,
        condition: Condition,
    ) -> Result<Self, EdfError> {
        let keep: Vec<usize> = (0..edf.signals.len())
            .filter(|&i| !edf.signals[i].is_annotation())
            .collect();
        if keep.is_empty() {
            return Err(EdfError::InvalidRecording("no EEG signals".into()));
        }
        let duration = edf.header.record_duration_s;
        let sample_rate = edf.signals[keep[0]].sample_rate(duration);
        let spr = edf.signals[keep[0]].samples_per_record;
        if let Some(&bad) = keep
            .iter()
            .find(|&&i| edf.signals[i].samples_per_record != spr)
        {
            return Err(EdfError::InvalidRecording(format!(
                "mixed sample rates: {:?} at {} Hz vs {sample_rate} Hz",
                edf.signals[bad].label,
                edf.signals[bad].sample_rate(duration)
            )));
        }

        let mut data = Vec::with_capacity(keep.len());
        let mut clamped = 0;
        for &i in &keep {
            let (phys, c) = to_physical_signal(&edf.digital[i], &edf.signals[i])?;
            clamped += c;
            if phys.iter().any(|v| !v.is_finite()) {
                return Err(EdfError::InvalidRecording(format!(
                    "non-finite samples in {:?}",
                    edf.signals[i].label
                )));
            }
            data.push(phys);
        }
        if clamped > 0 {
            warn!("{subject_id} {condition}: clamped {clamped} out-of-range digital samples");
        }
        Ok(Recording {
            subject_id: subject_id.to_string(),
            condition,
            sample_rate,
            channel_labels: keep
                .iter()
                .map(|&i| edf.signals[i].label.trim().to_string())
                .collect(),
            data,
        })
    }

    pub fn load(path: &Path, subject_id: &str, condition: Condition) -> Result<Self, EdfError> {
        let bytes = read_file(path)?;
        let edf = parse_edf(&bytes)?;
        Recording::from_edf(&edf, subject_id, condition)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, EdfError> {
    fs::read(path).map_err(|e| EdfError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CatalogEntry {
    pub subject_id: String,
    pub condition: Condition,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetCatalog {
    /// Sorted by (subject, condition); at most one per pair.
    pub entries: Vec<CatalogEntry>,
    pub excluded: Vec<Exclusion>,
}

impl DatasetCatalog {
    pub fn subjects(&self) -> Vec<String> {
        let mut s: Vec<String> = self.entries.iter().map(|e| e.subject_id.clone()).collect();
        s.dedup();
        s
    }

    pub fn entry(&self, subject_id: &str, condition: Condition) -> Option<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.subject_id == subject_id && e.condition == condition)
    }
}

/// Splits `S001R02.edf` into ("S001", 2).
pub fn parse_run_name(file_name: &str) -> Option<(String, u32)> {
    let stem = file_name
        .strip_suffix(".edf")
        .or_else(|| file_name.strip_suffix(".EDF"))?;
    let r = stem.find(['R', 'r'])?;
    let (subject, run) = stem.split_at(r);
    let digits = &subject[1.min(subject.len())..];
    if !subject.starts_with(['S', 's'])
        || digits.is_empty()
        || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let run = &run[1..];
    if run.is_empty() || !run.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((subject.to_ascii_uppercase(), run.parse().ok()?))
}

/// Checks rate and channel count from the header alone.
fn validate_header(bytes: &[u8]) -> Result<(), String> {
    let (header, signals, _) = parse_header(bytes).map_err(|e| e.to_string())?;
    let eeg: Vec<&SignalSpec> = signals.iter().filter(|s| !s.is_annotation()).collect();
    let rates: Vec<f64> = eeg
        .iter()
        .map(|s| s.sample_rate(header.record_duration_s))
        .collect();
    if let Some(&r) = rates.first() {
        if rates.iter().any(|&x| x != r) {
            return Err("mixed sample rates".into());
        }
        if (r - DATASET_SAMPLE_RATE).abs() > 1e-9 {
            return Err(format!("sample_rate != 160 (found {r})"));
        }
    }
    if eeg.len() != DATASET_CHANNELS {
        return Err(format!("channel_count != 64 (found {})", eeg.len()));
    }
    Ok(())
}

/// Scans `<root>/S###/S###R##.edf`, keeping runs 01 (eyes open) and 02
/// (eyes closed) that pass rate and channel-count validation.
pub fn catalog_dataset(root: &Path) -> Result<DatasetCatalog, EdfError> {
    let io_err = |e: std::io::Error| EdfError::Io {
        path: root.to_path_buf(),
        message: e.to_string(),
    };
    let mut files = Vec::new();
    for dir in fs::read_dir(root).map_err(io_err)? {
        let dir = dir.map_err(io_err)?.path();
        if dir.is_dir() {
            for f in fs::read_dir(&dir).map_err(io_err)? {
                let f = f.map_err(io_err)?.path();
                if f.is_file() {
                    files.push(f);
                }
            }
        }
    }
    files.retain(|f| {
        f.file_name()
            .and_then(|n| n.to_str())
            .and_then(parse_run_name)
            .is_some()
    });
    if files.is_empty() {
        return Err(EdfError::Io {
            path: root.to_path_buf(),
            message: "no S###/S###R##.edf recordings found".into(),
        });
    }
    files.sort();

    let mut catalog = DatasetCatalog::default();
    for path in files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let Some((subject_id, run)) = parse_run_name(name) else {
            continue;
        };
        let Some(condition) = Condition::from_run(run) else {
            continue;
        };
        let verdict = read_file(&path)
            .map_err(|e| e.to_string())
            .and_then(|bytes| validate_header(&bytes));
        match verdict {
            Err(reason) => catalog.excluded.push(Exclusion { path, reason }),
            Ok(()) => {
                if catalog.entry(&subject_id, condition).is_some() {
                    catalog.excluded.push(Exclusion {
                        path,
                        reason: format!("duplicate {subject_id} {condition}"),
                    });
                } else {
                    catalog.entries.push(CatalogEntry {
                        subject_id,
                        condition,
                        path,
                    });
                }
            }
        }
    }
    catalog.entries.sort();
    Ok(catalog)
}
