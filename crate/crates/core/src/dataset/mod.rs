//! From parsed records to a labelled, normalized, split set of beat windows.

mod baseline;
mod cache;
mod segment;
mod split;

use serde::{Deserialize, Serialize};

use crate::wfdb::BeatClass;

pub use baseline::{median_filter, remove_baseline, round_to_odd};
pub use cache::{decode_cache, encode_cache, read_cache_file, write_cache_file, CACHE_MAGIC, CACHE_VERSION};
pub use segment::{normalize_window, segment_beats, PhysicalRecord, SegmentStats, Segmented};
pub use split::{class_counts, class_weights, stratified_split, DatasetSplit, SplitFractions};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DatasetError {
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
    #[error("record {record}: lead {lead} requested but only {available} signals present")]
    MissingLead {
        record: String,
        lead: usize,
        available: usize,
    },
    #[error("class {0} has no members")]
    EmptyClass(BeatClass),
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
    #[error("not a beat-window cache (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    UnsupportedVersion(u16),
    #[error("cache truncated at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("cache payload inconsistent: {0}")]
    Inconsistent(String),
}

/// Preprocessing parameters. Durations are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub window_len: usize,
    pub leads: Vec<usize>,
    pub baseline_filter: bool,
    pub median_win_1: f64,
    pub median_win_2: f64,
    pub epsilon_std: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            window_len: 256,
            leads: vec![0, 1],
            baseline_filter: true,
            median_win_1: 0.2,
            median_win_2: 0.6,
            epsilon_std: 1e-6,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidConfig(m));
        if self.window_len == 0 || self.window_len % 2 != 0 {
            return bad(format!("window_len must be even and positive, got {}", self.window_len));
        }
        if self.window_len > u16::MAX as usize {
            return bad(format!("window_len {} exceeds {}", self.window_len, u16::MAX));
        }
        if self.leads.is_empty() {
            return bad("leads must not be empty".into());
        }
        let mut sorted = self.leads.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.leads.len() {
            return bad(format!("leads must be unique, got {:?}", self.leads));
        }
        if !(self.median_win_1 > 0.0 && self.median_win_1 < self.median_win_2) {
            return bad(format!(
                "median windows must satisfy 0 < median_win_1 < median_win_2, got {} and {}",
                self.median_win_1, self.median_win_2
            ));
        }
        if !(self.epsilon_std > 0.0) {
            return bad("epsilon_std must be positive".into());
        }
        Ok(())
    }
}

/// One normalized multi-lead beat snippet centred on an annotated R-peak.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatWindow {
    pub record_id: String,
    pub r_sample: i64,
    pub label: BeatClass,
    pub n_leads: usize,
    /// `n_leads × window_len`, channel-major.
    pub samples: Vec<f32>,
}

impl BeatWindow {
    pub fn window_len(&self) -> usize {
        self.samples.len() / self.n_leads
    }

    pub fn channel(&self, lead: usize) -> &[f32] {
        let w = self.window_len();
        &self.samples[lead * w..(lead + 1) * w]
    }
}
