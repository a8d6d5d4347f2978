use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{PreprocessConfig, SplitFractions};
use crate::model::{AdamHyper, ModelConfig};
use crate::wfdb::MITDB_RECORDS;
use crate::{Error, Result};

pub const DEFAULT_BASE_URL: &str = "https://physionet.org/files/mitdb/1.0.0/";

/// Everything a pipeline run needs. Loaded from a JSON file; every field is
/// optional and falls back to the default shown by `RunConfig::default()`.
/// Relative paths resolve against the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub cache_path: PathBuf,
    /// Checkpoint, training log and evaluation report go here.
    pub output_dir: PathBuf,
    pub base_url: String,
    pub records: Vec<String>,
    pub preprocess: PreprocessConfig,
    pub model: ModelConfig,
    pub optimizer: AdamHyper,
    pub split: SplitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub fractions: SplitFractions,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data/mitdb"),
            cache_path: PathBuf::from("data/beats.ebw"),
            output_dir: PathBuf::from("runs"),
            base_url: DEFAULT_BASE_URL.to_string(),
            records: MITDB_RECORDS.iter().map(|s| s.to_string()).collect(),
            preprocess: PreprocessConfig::default(),
            model: ModelConfig::default(),
            optimizer: AdamHyper::default(),
            split: SplitConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub records: Option<Vec<String>>,
    pub epochs: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`. Any failure, including a missing file, is a config error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// `--seed` sets both the split seed and the model seed.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.data_dir {
            self.data_dir = d.clone();
        }
        if let Some(s) = o.seed {
            self.split.seed = s;
            self.model.seed = s;
        }
        if let Some(r) = &o.records {
            self.records = r.clone();
        }
        if let Some(e) = o.epochs {
            self.optimizer.epochs = e;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Config("records must not be empty".into()));
        }
        if let Some(r) = self.records.iter().find(|r| r.is_empty() || r.contains(['/', '\\'])) {
            return Err(Error::Config(format!("invalid record name {r:?}")));
        }
        let cfg = |e: &dyn std::fmt::Display| Error::Config(e.to_string());
        self.preprocess.validate().map_err(|e| cfg(&e))?;
        self.model.validate().map_err(|e| cfg(&e))?;
        self.optimizer.validate().map_err(|e| cfg(&e))?;
        self.split.fractions.validate().map_err(|e| cfg(&e))?;
        if self.optimizer.batch_size == 0 || self.optimizer.epochs == 0 {
            return Err(Error::Config("optimizer batch_size and epochs must be positive".into()));
        }
        if self.model.in_channels != self.preprocess.leads.len() || self.model.window_len != self.preprocess.window_len {
            return Err(Error::Config(format!(
                "model expects {} leads × {} samples but preprocessing produces {} × {}",
                self.model.in_channels,
                self.model.window_len,
                self.preprocess.leads.len(),
                self.preprocess.window_len
            )));
        }
        Ok(())
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.output_dir.join("model.ebnc")
    }

    pub fn log_path(&self) -> PathBuf {
        self.output_dir.join("train.jsonl")
    }

    pub fn report_path(&self) -> PathBuf {
        self.output_dir.join("eval.json")
    }
}
