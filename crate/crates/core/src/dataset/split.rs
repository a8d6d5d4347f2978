use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::rng::stream_rng;
use crate::wfdb::BeatClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let f = [self.train, self.val, self.test];
        let sum: f64 = f.iter().sum();
        if f.iter().any(|&x| !(x > 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(DatasetError::BadFractions(f));
        }
        Ok(())
    }
}

/// Disjoint index buckets into a beat-window array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class stratified split. Within class `c` the member indices are
/// shuffled by a generator seeded from `(seed, c)` and cut at
/// `round(n_c·train)` and `round(n_c·(train+val))`. Each bucket is returned
/// in ascending index order.
///
/// A class with no members simply contributes nothing to any bucket.
pub fn stratified_split(labels: &[BeatClass], fractions: SplitFractions, seed: u64) -> Result<DatasetSplit, DatasetError> {
    fractions.validate()?;
    let mut split = DatasetSplit {
        seed,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for class in BeatClass::ALL {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut stream_rng(seed, class.index() as u64));
        let n = members.len() as f64;
        let cut1 = (n * fractions.train).round() as usize;
        let cut2 = ((n * (fractions.train + fractions.val)).round() as usize).max(cut1);
        split.train.extend_from_slice(&members[..cut1]);
        split.val.extend_from_slice(&members[cut1..cut2]);
        split.test.extend_from_slice(&members[cut2..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

pub fn class_counts(labels: &[BeatClass]) -> [usize; BeatClass::COUNT] {
    let mut counts = [0; BeatClass::COUNT];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Inverse-frequency weights `w_c = N / (5 · n_c)`.
pub fn class_weights(labels: &[BeatClass]) -> Result<[f64; BeatClass::COUNT], DatasetError> {
    let counts = class_counts(labels);
    let total = labels.len() as f64;
    let mut w = [0.0; BeatClass::COUNT];
    for class in BeatClass::ALL {
        let n = counts[class.index()];
        if n == 0 {
            return Err(DatasetError::EmptyClass(class));
        }
        w[class.index()] = total / (BeatClass::COUNT as f64 * n as f64);
    }
    Ok(w)
}
