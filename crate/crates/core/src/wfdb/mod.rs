//! Reader for the three WFDB file kinds the MIT-BIH arrhythmia database uses:
//! `.hea` text headers, format-212 `.dat` signal files and MIT-format `.atr`
//! annotation files.
//!
//! All parsers are pure functions over in-memory bytes. [`Record::load`]
//! is the only place that touches the filesystem.

mod annotation;
mod beat;
mod header;
mod signal;

use std::path::Path;

pub use annotation::{parse_annotations, AnnotationEvent, PseudoCode};
pub use beat::{code_mnemonic, map_beat_class, BeatClass};
pub use header::{parse_header, RecordHeader, SignalSpec, DEFAULT_ADC_GAIN, DEFAULT_SAMPLING_FREQUENCY};
pub use signal::{decode_format212, to_physical, verify_checksums, ChecksumCheck, SignalData};

use crate::{Error, Result};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WfdbError {
    #[error("malformed header (line {line}): {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("unsupported signal format {0} (only format 212 is supported)")]
    UnsupportedFormat(u16),
    #[error("signal file truncated: need {needed} bytes, found {found}")]
    TruncatedSignalFile { needed: usize, found: usize },
    #[error("annotation file truncated at byte offset {offset}")]
    TruncatedAnnotationFile { offset: usize },
    #[error("annotation code {code} at byte offset {offset} is in the unused pseudo-code range 50..=58")]
    UnknownPseudoCodeLayout { code: u8, offset: usize },
    #[error("annotation time went out of order at byte offset {offset} (sample {sample})")]
    AnnotationOutOfOrder { offset: usize, sample: i64 },
    #[error("signal shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("record uses more than one signal file ({0:?}); only single-file records are supported")]
    MultipleSignalFiles(Vec<String>),
}

/// A record loaded from disk: header, decoded digital samples and, when
/// present, the reference annotations.
#[derive(Debug, Clone)]
pub struct Record {
    pub header: RecordHeader,
    pub signals: SignalData,
    pub annotations: Vec<AnnotationEvent>,
}

impl Record {
    /// Reads `<dir>/<name>.hea`, the signal file it names, and
    /// `<dir>/<name>.<annotator>`.
    pub fn load(dir: &Path, name: &str, annotator: &str) -> Result<Self> {
        let header = read_header(dir, name)?;
        let signals = read_signals(dir, &header)?;
        let atr = dir.join(format!("{name}.{annotator}"));
        let bytes = std::fs::read(&atr).map_err(|e| Error::io(&atr, e))?;
        let annotations = parse_annotations(&bytes).map_err(|e| with_path(&atr, e))?;
        Ok(Self {
            header,
            signals,
            annotations,
        })
    }

    pub fn id(&self) -> &str {
        &self.header.record_name
    }

    pub fn physical(&self) -> Result<Vec<Vec<f64>>> {
        Ok(to_physical(&self.signals, &self.header)?)
    }

    pub fn duration_seconds(&self) -> f64 {
        self.signals.n_samples as f64 / self.header.sampling_frequency
    }
}

pub fn read_header(dir: &Path, name: &str) -> Result<RecordHeader> {
    let path = dir.join(format!("{name}.hea"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_header(&text).map_err(|e| with_path(&path, e))
}

/// Decodes the signal file named by `header`. A header sample count of 0
/// means "unknown", in which case the count is inferred from the file size.
pub fn read_signals(dir: &Path, header: &RecordHeader) -> Result<SignalData> {
    let files: Vec<String> = {
        let mut v: Vec<String> = header.signals.iter().map(|s| s.file_name.clone()).collect();
        v.dedup();
        v
    };
    if files.len() != 1 {
        return Err(WfdbError::MultipleSignalFiles(files).into());
    }
    for s in &header.signals {
        if s.format_code != 212 {
            return Err(WfdbError::UnsupportedFormat(s.format_code).into());
        }
    }
    let path = dir.join(&files[0]);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let n_samples = if header.n_samples == 0 {
        bytes.len() * 2 / 3 / header.n_signals
    } else {
        header.n_samples
    };
    decode_format212(&bytes, header.n_signals, n_samples).map_err(|e| with_path(&path, e))
}

fn with_path(path: &Path, source: WfdbError) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        source,
    }
}

/// Canonical list of the 48 MIT-BIH arrhythmia database records.
pub const MITDB_RECORDS: [&str; 48] = [
    "100", "101", "102", "103", "104", "105", "106", "107", "108", "109", "111", "112", "113", "114", "115", "116",
    "117", "118", "119", "121", "122", "123", "124", "200", "201", "202", "203", "205", "207", "208", "209", "210",
    "212", "213", "214", "215", "217", "219", "220", "221", "222", "223", "228", "230", "231", "232", "233", "234",
];
