use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::fetch::{fetch_records, FetchOptions, FileAction, FileOutcome};
use crate::atomic::write_atomic;
use crate::dataset::{
    class_weights, read_cache_file, segment_beats, stratified_split, write_cache_file, BeatWindow, DatasetSplit,
    PhysicalRecord, SegmentStats,
};
use crate::metrics::{ConfusionMatrix, EvalReport};
use crate::model::{
    evaluate_loss, load_checkpoint, predict, save_checkpoint, train, window_tensor, CheckpointMeta, ModelError,
};
use crate::wfdb::{code_mnemonic, map_beat_class, verify_checksums, BeatClass, Record};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Output sinks and the global output switches.
pub struct Ctx<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub format: Format,
    pub strict: bool,
}

impl Ctx<'_> {
    fn emit(&mut self, text: &str) -> Result<()> {
        self.out
            .write_all(text.as_bytes())
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io("<stdout>", e))
    }

    fn emit_json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).expect("summary serializes");
        s.push('\n');
        self.emit(&s)
    }

    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.err, "{msg}");
    }

    /// Under `--strict` the problem becomes the command's error.
    fn warn(&mut self, problem: Error) -> Result<()> {
        if self.strict {
            return Err(problem);
        }
        self.note(&format!("warning: {problem}"));
        Ok(())
    }
}

/// A bare record name is looked up in the data directory; anything with a
/// path separator is taken as a path to the record (with or without `.hea`).
pub fn locate_record(data_dir: &Path, record: &str) -> (PathBuf, String) {
    if !record.contains(['/', '\\']) {
        return (data_dir.to_path_buf(), record.to_string());
    }
    let p = Path::new(record);
    let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = name.strip_suffix(".hea").unwrap_or(&name).to_string();
    let dir = p.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    (dir, name)
}

fn checksum_problem(rec: &Record) -> Option<Error> {
    let failed: Vec<usize> = verify_checksums(&rec.signals, &rec.header)
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.signal)
        .collect();
    (!failed.is_empty()).then(|| Error::ChecksumMismatch {
        record: rec.id().to_string(),
        signals: failed,
    })
}

#[derive(Serialize)]
struct ClassCount {
    class: &'static str,
    count: usize,
}

fn class_table(counts: &[usize; BeatClass::COUNT]) -> Vec<ClassCount> {
    BeatClass::ALL
        .iter()
        .map(|c| ClassCount {
            class: c.name(),
            count: counts[c.index()],
        })
        .collect()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

// ---- fetch ----

#[derive(Serialize)]
struct RecordCheck {
    record: String,
    checksums_ok: bool,
}

#[derive(Serialize)]
struct FetchSummary {
    data_dir: PathBuf,
    files: Vec<FileOutcome>,
    bytes_transferred: u64,
    records: Vec<RecordCheck>,
}

pub fn fetch(ctx: &mut Ctx, cfg: &RunConfig, opts: &FetchOptions) -> Result<()> {
    let files = fetch_records(&cfg.data_dir, &cfg.records, opts)?;
    let mut records = Vec::new();
    let mut problems = Vec::new();
    for r in &cfg.records {
        let rec = Record::load(&cfg.data_dir, r, "atr")?;
        let p = checksum_problem(&rec);
        records.push(RecordCheck {
            record: r.clone(),
            checksums_ok: p.is_none(),
        });
        problems.extend(p);
    }
    let summary = FetchSummary {
        data_dir: cfg.data_dir.clone(),
        bytes_transferred: files.iter().map(|f| f.bytes_transferred).sum(),
        files,
        records,
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&summary)?,
        Format::Text => {
            let mut s = String::new();
            for f in &summary.files {
                let action = match f.action {
                    FileAction::Verified => "verified",
                    FileAction::Recorded => "recorded",
                    FileAction::Downloaded => "downloaded",
                    FileAction::Replaced => "replaced",
                };
                s += &format!("{:<10} {:<11} {:>9} bytes  sha256 {}\n", f.name, action, f.entry.size, f.entry.sha256);
            }
            s += &format!(
                "{} files in {}, {} bytes transferred\n",
                summary.files.len(),
                summary.data_dir.display(),
                summary.bytes_transferred
            );
            ctx.emit(&s)?;
        }
    }
    for p in problems {
        ctx.warn(p)?;
    }
    Ok(())
}

// ---- inspect ----

#[derive(Serialize)]
struct LeadSummary {
    index: usize,
    description: String,
    units: String,
    adc_gain: f64,
    checksum_ok: Option<bool>,
}

#[derive(Serialize)]
struct CodeCount {
    code: u8,
    symbol: Option<&'static str>,
    count: usize,
}

#[derive(Serialize)]
struct InspectSummary {
    record: String,
    fs: f64,
    n_samples: usize,
    duration_s: f64,
    leads: Vec<LeadSummary>,
    annotations: usize,
    by_code: Vec<CodeCount>,
    beats_total: usize,
    beats: Vec<ClassCount>,
}

pub fn inspect(ctx: &mut Ctx, cfg: &RunConfig, record: &str, annotator: &str) -> Result<()> {
    let (dir, name) = locate_record(&cfg.data_dir, record);
    let rec = Record::load(&dir, &name, annotator)?;
    let checks = verify_checksums(&rec.signals, &rec.header);
    let leads = rec
        .header
        .signals
        .iter()
        .zip(&checks)
        .enumerate()
        .map(|(i, (s, c))| LeadSummary {
            index: i,
            description: s.description.clone(),
            units: s.units.clone(),
            adc_gain: s.effective_gain(),
            checksum_ok: c.expected.map(|e| e == c.computed),
        })
        .collect();
    let mut hist = [0usize; 256];
    let mut classes = [0usize; BeatClass::COUNT];
    for a in &rec.annotations {
        hist[a.code as usize] += 1;
        if let Some(c) = map_beat_class(a.code) {
            classes[c.index()] += 1;
        }
    }
    let summary = InspectSummary {
        record: rec.id().to_string(),
        fs: rec.header.sampling_frequency,
        n_samples: rec.signals.n_samples,
        duration_s: round6(rec.duration_seconds()),
        leads,
        annotations: rec.annotations.len(),
        by_code: (0..=u8::MAX)
            .filter(|&c| hist[c as usize] > 0)
            .map(|c| CodeCount {
                code: c,
                symbol: code_mnemonic(c),
                count: hist[c as usize],
            })
            .collect(),
        beats_total: classes.iter().sum(),
        beats: class_table(&classes),
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&summary)?,
        Format::Text => {
            let mut s = format!(
                "record {}\n  sampling frequency {} Hz\n  samples {} ({:.1} s)\n",
                summary.record, summary.fs, summary.n_samples, summary.duration_s
            );
            for l in &summary.leads {
                let ck = match l.checksum_ok {
                    Some(true) => "checksum ok",
                    Some(false) => "CHECKSUM MISMATCH",
                    None => "no checksum",
                };
                s += &format!("  lead {} {:<6} gain {} adu/{}  {ck}\n", l.index, l.description, l.adc_gain, l.units);
            }
            s += &format!("annotations {}\n", summary.annotations);
            for c in &summary.by_code {
                s += &format!("  code {:>3} {:<2} {:>7}\n", c.code, c.symbol.unwrap_or("?"), c.count);
            }
            s += &format!("beats {}\n", summary.beats_total);
            for c in &summary.beats {
                s += &format!("  {:<7} {:>7}\n", c.class, c.count);
            }
            ctx.emit(&s)?;
        }
    }
    if let Some(p) = checksum_problem(&rec) {
        ctx.warn(p)?;
    }
    Ok(())
}

// ---- segment ----

#[derive(Serialize)]
struct SegmentSummary {
    cache: PathBuf,
    records: usize,
    annotations: usize,
    unmapped: usize,
    boundary_dropped: usize,
    windows: usize,
    per_class: Vec<ClassCount>,
}

/// Loads, preprocesses and segments every configured record, one record per
/// task, keeping configuration order.
pub fn segment_records(ctx: &mut Ctx, cfg: &RunConfig) -> Result<(Vec<BeatWindow>, SegmentStats)> {
    let per: Vec<Result<(Vec<BeatWindow>, SegmentStats, Option<Error>)>> = cfg
        .records
        .par_iter()
        .map(|r| {
            let rec = Record::load(&cfg.data_dir, r, "atr")?;
            let problem = checksum_problem(&rec);
            let phys = PhysicalRecord::from_record(&rec)?;
            drop(rec);
            let seg = segment_beats(&[phys], &cfg.preprocess)?;
            Ok((seg.windows, seg.stats, problem))
        })
        .collect();
    let mut windows = Vec::new();
    let mut stats = SegmentStats::default();
    for r in per {
        let (w, s, problem) = r?;
        if let Some(p) = problem {
            ctx.warn(p)?;
        }
        windows.extend(w);
        stats.merge(&s);
    }
    Ok((windows, stats))
}

pub fn segment(ctx: &mut Ctx, cfg: &RunConfig) -> Result<()> {
    let (windows, stats) = segment_records(ctx, cfg)?;
    write_cache_file(&cfg.cache_path, &windows)?;
    let summary = SegmentSummary {
        cache: cfg.cache_path.clone(),
        records: cfg.records.len(),
        annotations: stats.annotations,
        unmapped: stats.unmapped,
        boundary_dropped: stats.boundary_dropped,
        windows: stats.emitted,
        per_class: class_table(&stats.per_class),
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&summary),
        Format::Text => {
            let mut s = format!(
                "{} records, {} annotations: {} beat windows, {} unmapped, {} too close to an edge\n",
                summary.records, summary.annotations, summary.windows, summary.unmapped, summary.boundary_dropped
            );
            for c in &summary.per_class {
                s += &format!("  {:<7} {:>7}\n", c.class, c.count);
            }
            s += &format!("wrote {}\n", summary.cache.display());
            ctx.emit(&s)
        }
    }
}

// ---- train / eval ----

/// Reads the cache and checks that its windows have the configured shape.
pub fn load_windows(cfg: &RunConfig) -> Result<Vec<BeatWindow>> {
    let windows = read_cache_file(&cfg.cache_path)?;
    let (c, w) = (cfg.model.in_channels, cfg.model.window_len);
    if let Some(bad) = windows.iter().find(|x| x.n_leads != c || x.window_len() != w) {
        return Err(Error::Config(format!(
            "{} holds {} × {} windows, the config expects {c} × {w}; rerun segment",
            cfg.cache_path.display(),
            bad.n_leads,
            bad.window_len()
        )));
    }
    Ok(windows)
}

pub fn split_windows(cfg: &RunConfig, windows: &[BeatWindow]) -> Result<DatasetSplit> {
    let labels: Vec<BeatClass> = windows.iter().map(|w| w.label).collect();
    Ok(stratified_split(&labels, cfg.split.fractions, cfg.split.seed)?)
}

#[derive(Serialize)]
struct TrainSummary {
    checkpoint: PathBuf,
    log: PathBuf,
    epochs: usize,
    best_epoch: usize,
    best_val_accuracy: Option<f64>,
    train_accuracy: f64,
    train_size: usize,
    val_size: usize,
    test_size: usize,
}

pub fn train_cmd(ctx: &mut Ctx, cfg: &RunConfig, checkpoint: &Path, log_path: &Path) -> Result<()> {
    let windows = load_windows(cfg)?;
    let split = split_windows(cfg, &windows)?;
    let train_labels: Vec<BeatClass> = split.train.iter().map(|&i| windows[i].label).collect();
    let weights = class_weights(&train_labels)?;

    let epochs = cfg.optimizer.epochs;
    let mut log = String::new();
    let err = &mut *ctx.err;
    let outcome = train(&windows, &split, &cfg.model, &cfg.optimizer, weights, |s| {
        log += &serde_json::to_string(s).expect("epoch stats serialize");
        log.push('\n');
        let val = match (s.val_loss, s.val_accuracy) {
            (Some(l), Some(a)) => format!("  val loss {l:.4} acc {:.2}%", 100.0 * a),
            _ => String::new(),
        };
        let _ = writeln!(
            err,
            "epoch {:>3}/{epochs}  train loss {:.4} acc {:.2}%{val}",
            s.epoch,
            s.train_loss,
            100.0 * s.train_accuracy
        );
    })?;

    let meta = CheckpointMeta {
        epoch: outcome.best_epoch as u32,
        split_seed: cfg.split.seed,
        step: outcome.best_step,
    };
    save_checkpoint(checkpoint, &outcome.network, &meta)?;
    write_atomic(log_path, log.as_bytes())?;

    let (_, train_accuracy) = evaluate_loss(&outcome.network, &windows, &split.train, &weights)?.expect("train bucket is non-empty");
    let summary = TrainSummary {
        checkpoint: checkpoint.to_path_buf(),
        log: log_path.to_path_buf(),
        epochs,
        best_epoch: outcome.best_epoch,
        best_val_accuracy: outcome.history.get(outcome.best_epoch.wrapping_sub(1)).and_then(|s| s.val_accuracy),
        train_accuracy,
        train_size: split.train.len(),
        val_size: split.val.len(),
        test_size: split.test.len(),
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&summary),
        Format::Text => {
            let val = summary.best_val_accuracy.map_or_else(|| "n/a".into(), |a| format!("{:.2}%", 100.0 * a));
            ctx.emit(&format!(
                "trained {} epochs on {} beats ({} validation, {} held out)\nbest epoch {} (validation accuracy {val}), training accuracy {:.2}%\nwrote {} and {}\n",
                summary.epochs,
                summary.train_size,
                summary.val_size,
                summary.test_size,
                summary.best_epoch,
                100.0 * summary.train_accuracy,
                summary.checkpoint.display(),
                summary.log.display()
            ))
        }
    }
}

pub fn eval_cmd(ctx: &mut Ctx, cfg: &RunConfig, checkpoint: &Path, report_path: &Path) -> Result<()> {
    let windows = load_windows(cfg)?;
    let split = split_windows(cfg, &windows)?;
    let ck = load_checkpoint(checkpoint, &cfg.model)?;
    if ck.meta.split_seed != cfg.split.seed {
        ctx.warn(Error::Config(format!(
            "{} was trained with split seed {}, evaluating with split seed {}",
            checkpoint.display(),
            ck.meta.split_seed,
            cfg.split.seed
        )))?;
    }
    let pairs = split
        .test
        .par_iter()
        .map(|&i| {
            let w = &windows[i];
            Ok((w.label, predict(&ck.network, &window_tensor(w)?)?.class))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let mut cm = ConfusionMatrix::new();
    for (truth, pred) in pairs {
        cm.accumulate(truth, pred);
    }
    let report = EvalReport::from_matrix(&cm)?;
    let json = report.to_json();
    write_atomic(report_path, json.as_bytes())?;
    match ctx.format {
        Format::Json => ctx.emit(&json),
        Format::Text => ctx.emit(&format!("{}\nwrote {}\n", report.to_text(), report_path.display())),
    }
}

// ---- predict ----

pub fn predict_cmd(ctx: &mut Ctx, cfg: &RunConfig, checkpoint: &Path, record: &str, annotator: &str) -> Result<()> {
    let (dir, name) = locate_record(&cfg.data_dir, record);
    let rec = Record::load(&dir, &name, annotator)?;
    if let Some(p) = checksum_problem(&rec) {
        ctx.warn(p)?;
    }
    let ck = load_checkpoint(checkpoint, &cfg.model)?;
    let phys = PhysicalRecord::from_record(&rec)?;
    let seg = segment_beats(&[phys], &cfg.preprocess)?;
    let preds = seg
        .windows
        .par_iter()
        .map(|w| predict(&ck.network, &window_tensor(w)?))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let mut s = String::new();
    for (w, p) in seg.windows.iter().zip(&preds) {
        let probs: Vec<String> = p.probabilities.iter().map(|v| format!("{v:.6}")).collect();
        match ctx.format {
            Format::Text => s += &format!("{} {} {}\n", w.r_sample, p.class.name(), probs.join(" ")),
            Format::Json => {
                s += &format!(
                    "{{\"sample\": {}, \"class\": \"{}\", \"probabilities\": [{}]}}\n",
                    w.r_sample,
                    p.class.name(),
                    probs.join(", ")
                )
            }
        }
    }
    ctx.emit(&s)
}
