use rayon::prelude::*;

use super::{remove_baseline, BeatWindow, DatasetError, PreprocessConfig};
use crate::wfdb::{map_beat_class, AnnotationEvent, BeatClass, Record};
use crate::Result;

/// A record in physical units, ready for segmentation.
#[derive(Debug, Clone)]
pub struct PhysicalRecord {
    pub record_id: String,
    pub fs: f64,
    /// Millivolts, one vector per signal.
    pub signals: Vec<Vec<f64>>,
    pub annotations: Vec<AnnotationEvent>,
}

impl PhysicalRecord {
    pub fn from_record(record: &Record) -> Result<Self> {
        Ok(Self {
            record_id: record.id().to_string(),
            fs: record.header.sampling_frequency,
            signals: record.physical()?,
            annotations: record.annotations.clone(),
        })
    }

    fn n_samples(&self) -> usize {
        self.signals.first().map_or(0, Vec::len)
    }
}

/// Accounting for one segmentation pass:
/// `emitted + boundary_dropped + unmapped == annotations`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SegmentStats {
    pub annotations: usize,
    pub unmapped: usize,
    pub boundary_dropped: usize,
    pub emitted: usize,
    pub per_class: [usize; BeatClass::COUNT],
}

impl SegmentStats {
    pub fn merge(&mut self, o: &SegmentStats) {
        self.annotations += o.annotations;
        self.unmapped += o.unmapped;
        self.boundary_dropped += o.boundary_dropped;
        self.emitted += o.emitted;
        for (a, b) in self.per_class.iter_mut().zip(o.per_class) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmented {
    pub windows: Vec<BeatWindow>,
    pub stats: SegmentStats,
}

/// Per-channel z-score: `(x - mean) / max(std, epsilon_std)` with the
/// population standard deviation. `raw` is `n_leads × W`, channel-major.
pub fn normalize_window(raw: &[f64], n_leads: usize, epsilon_std: f64) -> Vec<f64> {
    let w = raw.len() / n_leads;
    assert!(w >= 2 && w * n_leads == raw.len(), "window must be n_leads × W with W >= 2");
    let mut out = Vec::with_capacity(raw.len());
    for ch in raw.chunks_exact(w) {
        let mean = ch.iter().sum::<f64>() / w as f64;
        let var = ch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / w as f64;
        let scale = var.sqrt().max(epsilon_std);
        out.extend(ch.iter().map(|v| (v - mean) / scale));
    }
    out
}

fn segment_record(rec: &PhysicalRecord, config: &PreprocessConfig) -> Result<Segmented, DatasetError> {
    for &lead in &config.leads {
        if lead >= rec.signals.len() {
            return Err(DatasetError::MissingLead {
                record: rec.record_id.clone(),
                lead,
                available: rec.signals.len(),
            });
        }
    }
    let leads: Vec<Vec<f64>> = config
        .leads
        .iter()
        .map(|&l| {
            if config.baseline_filter {
                remove_baseline(&rec.signals[l], rec.fs, config.median_win_1, config.median_win_2)
            } else {
                rec.signals[l].clone()
            }
        })
        .collect();

    let n = rec.n_samples() as i64;
    let half = (config.window_len / 2) as i64;
    let mut stats = SegmentStats {
        annotations: rec.annotations.len(),
        ..Default::default()
    };
    let mut windows = Vec::new();
    let mut raw = Vec::with_capacity(leads.len() * config.window_len);
    for ann in &rec.annotations {
        let Some(label) = map_beat_class(ann.code) else {
            stats.unmapped += 1;
            continue;
        };
        let r = ann.sample_index as i64;
        let (start, end) = (r - half, r + half);
        if start < 0 || end > n {
            stats.boundary_dropped += 1;
            continue;
        }
        raw.clear();
        for lead in &leads {
            raw.extend_from_slice(&lead[start as usize..end as usize]);
        }
        let samples = normalize_window(&raw, leads.len(), config.epsilon_std)
            .into_iter()
            .map(|v| v as f32)
            .collect();
        stats.emitted += 1;
        stats.per_class[label.index()] += 1;
        windows.push(BeatWindow {
            record_id: rec.record_id.clone(),
            r_sample: r,
            label,
            n_leads: leads.len(),
            samples,
        });
    }
    Ok(Segmented { windows, stats })
}

/// Cuts a `window_len`-sample window per lead around every annotation whose
/// code maps to a beat class, spanning `[r - W/2, r + W/2)`. Beats whose
/// window leaves the record are dropped. Records are processed in parallel;
/// output keeps record order, then annotation order.
pub fn segment_beats(records: &[PhysicalRecord], config: &PreprocessConfig) -> Result<Segmented, DatasetError> {
    config.validate()?;
    let parts = records
        .par_iter()
        .map(|r| segment_record(r, config))
        .collect::<Result<Vec<_>, _>>()?;
    let mut stats = SegmentStats::default();
    let mut windows = Vec::with_capacity(parts.iter().map(|p| p.windows.len()).sum());
    for p in parts {
        stats.merge(&p.stats);
        windows.extend(p.windows);
    }
    Ok(Segmented { windows, stats })
}
