//! Downloading records with a trust-on-first-use digest manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomic::write_atomic;
use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const RECORD_EXTENSIONS: [&str; 3] = ["hea", "dat", "atr"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub size: u64,
    pub sha256: String,
}

impl FileEntry {
    pub fn of(bytes: &[u8]) -> Self {
        Self {
            size: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// `manifest.json` in the data directory, keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: BTreeMap<String, FileEntry>,
}

impl Manifest {
    /// A missing manifest is an empty one.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_NAME), text.as_bytes())
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub base_url: String,
    pub jobs: usize,
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            base_url: super::config::DEFAULT_BASE_URL.to_string(),
            jobs: 4,
            attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileAction {
    /// Present and matching the manifest.
    Verified,
    /// Present but not yet in the manifest; its digest is recorded as is.
    Recorded,
    Downloaded,
    /// Present with the wrong digest and downloaded again.
    Replaced,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileOutcome {
    pub name: String,
    pub action: FileAction,
    pub bytes_transferred: u64,
    #[serde(flatten)]
    pub entry: FileEntry,
}

fn file_url(base: &str, name: &str) -> String {
    if base.ends_with('/') {
        format!("{base}{name}")
    } else {
        format!("{base}/{name}")
    }
}

fn download(agent: &ureq::Agent, url: &str, opts: &FetchOptions) -> Result<Vec<u8>> {
    let mut delay = opts.backoff;
    let mut last = String::new();
    for attempt in 1..=opts.attempts.max(1) {
        match agent.get(url).call() {
            Ok(resp) => match resp.into_body().with_config().limit(1 << 30).read_to_vec() {
                Ok(bytes) => return Ok(bytes),
                Err(e) => last = e.to_string(),
            },
            // A missing file will not appear on retry.
            Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) => {
                return Err(Error::Network(format!("{url}: HTTP {code}")));
            }
            Err(e) => last = e.to_string(),
        }
        if attempt < opts.attempts {
            std::thread::sleep(delay);
            delay *= 2;
        }
    }
    Err(Error::Network(format!("{url}: {last} (after {} attempts)", opts.attempts.max(1))))
}

fn fetch_file(agent: &ureq::Agent, dir: &Path, name: &str, known: Option<&FileEntry>, opts: &FetchOptions) -> Result<FileOutcome> {
    let path = dir.join(name);
    let url = file_url(&opts.base_url, name);
    let outcome = |action, bytes_transferred, entry| FileOutcome {
        name: name.to_string(),
        action,
        bytes_transferred,
        entry,
    };
    let mismatch = |expected: &FileEntry, actual: &FileEntry| Error::DigestMismatch {
        path: path.clone(),
        expected: expected.sha256.clone(),
        actual: actual.sha256.clone(),
    };

    let local = match std::fs::read(&path) {
        Ok(b) => Some(FileEntry::of(&b)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(path, e)),
    };
    match (local, known) {
        (Some(l), Some(k)) if &l == k => Ok(outcome(FileAction::Verified, 0, l)),
        (Some(l), None) => Ok(outcome(FileAction::Recorded, 0, l)),
        (Some(_), Some(k)) => {
            let bytes = download(agent, &url, opts)?;
            let got = FileEntry::of(&bytes);
            if &got != k {
                return Err(mismatch(k, &got));
            }
            write_atomic(&path, &bytes)?;
            Ok(outcome(FileAction::Replaced, got.size, got))
        }
        (None, _) => {
            let mut bytes = download(agent, &url, opts)?;
            let mut transferred = bytes.len() as u64;
            let mut got = FileEntry::of(&bytes);
            if let Some(k) = known.filter(|k| *k != &got) {
                bytes = download(agent, &url, opts)?;
                transferred += bytes.len() as u64;
                got = FileEntry::of(&bytes);
                if &got != k {
                    return Err(mismatch(k, &got));
                }
            }
            write_atomic(&path, &bytes)?;
            Ok(outcome(FileAction::Downloaded, transferred, got))
        }
    }
}

/// Fetches `.hea`, `.dat` and `.atr` for every record into `dir`, at most
/// `opts.jobs` at a time. Files already present are checked against the
/// manifest rather than downloaded. The manifest is rewritten with whatever
/// completed, even when some file failed; the first failure is returned.
pub fn fetch_records(dir: &Path, records: &[String], opts: &FetchOptions) -> Result<Vec<FileOutcome>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest::load(dir)?;
    let names: Vec<String> = records
        .iter()
        .flat_map(|r| RECORD_EXTENSIONS.iter().map(move |ext| format!("{r}.{ext}")))
        .collect();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(opts.timeout))
        .build()
        .into();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<FileOutcome>> = pool.install(|| {
        names
            .par_iter()
            .map(|n| fetch_file(&agent, dir, n, manifest.files.get(n), opts))
            .collect()
    });

    let mut outcomes = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(o) => {
                manifest.files.insert(o.name.clone(), o.entry.clone());
                outcomes.push(o);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    manifest.save(dir)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(outcomes),
    }
}
