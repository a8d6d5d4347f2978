//! Synthetic labelled two-lead ECG.
//!
//! Each beat is a sum of Gaussian bumps (P, Q, R, S, T and, where the class
//! calls for it, R'), with class-specific timing, width and amplitude and a
//! per-beat random jitter. Records add slow baseline wander and white noise
//! and carry MIT annotation codes at the R-peaks, so they go through the same
//! segmentation path as real records.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{segment_beats, BeatWindow, PhysicalRecord, PreprocessConfig};
use crate::rng::stream_rng;
use crate::wfdb::{AnnotationEvent, BeatClass};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub fs: f64,
    pub n_leads: usize,
    /// Relative standard deviation applied to every bump's amplitude,
    /// width and offset.
    pub jitter: f64,
    /// White noise standard deviation, mV.
    pub noise_mv: f64,
    /// Peak baseline wander, mV.
    pub wander_mv: f64,
    pub preprocess: PreprocessConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            fs: 360.0,
            n_leads: 2,
            jitter: 0.1,
            noise_mv: 0.02,
            wander_mv: 0.3,
            preprocess: PreprocessConfig::default(),
        }
    }
}

/// One Gaussian component: offset from the R-peak (s), amplitude per lead
/// (mV), width (s).
#[derive(Clone, Copy)]
struct Bump {
    at: f64,
    amp: [f64; 2],
    width: f64,
}

const fn b(at: f64, a0: f64, a1: f64, width: f64) -> Bump {
    Bump {
        at,
        amp: [a0, a1],
        width,
    }
}

const NORMAL: [Bump; 5] = [
    b(-0.20, 0.15, 0.10, 0.025),
    b(-0.03, -0.10, -0.05, 0.010),
    b(0.0, 1.10, 0.70, 0.011),
    b(0.03, -0.25, -0.35, 0.010),
    b(0.26, 0.30, 0.25, 0.045),
];

const LBBB: [Bump; 4] = [
    b(-0.22, 0.12, 0.08, 0.025),
    b(-0.02, 0.80, 0.90, 0.022),
    b(0.03, 0.75, 0.85, 0.022),
    b(0.28, -0.30, -0.35, 0.055),
];

const RBBB: [Bump; 5] = [
    b(-0.20, 0.14, 0.10, 0.025),
    b(0.0, 0.70, 0.30, 0.011),
    b(0.035, -0.35, -0.55, 0.012),
    b(0.07, 0.55, 0.25, 0.016),
    b(0.28, 0.20, 0.30, 0.050),
];

const APC: [Bump; 5] = [
    b(-0.13, -0.10, 0.12, 0.018),
    b(-0.03, -0.10, -0.05, 0.010),
    b(0.0, 1.00, 0.65, 0.011),
    b(0.03, -0.25, -0.30, 0.010),
    b(0.24, 0.25, 0.20, 0.045),
];

const PVC: [Bump; 4] = [
    b(-0.02, -0.30, 0.40, 0.020),
    b(0.0, 1.40, -0.90, 0.030),
    b(0.06, -0.60, 0.50, 0.030),
    b(0.30, -0.40, 0.35, 0.070),
];

fn morphology(class: BeatClass) -> &'static [Bump] {
    match class {
        BeatClass::Normal => &NORMAL,
        BeatClass::Lbbb => &LBBB,
        BeatClass::Rbbb => &RBBB,
        BeatClass::Apc => &APC,
        BeatClass::Pvc => &PVC,
    }
}

/// MIT annotation code for a class.
pub fn mit_code(class: BeatClass) -> u8 {
    match class {
        BeatClass::Normal => 1,
        BeatClass::Lbbb => 2,
        BeatClass::Rbbb => 3,
        BeatClass::Apc => 8,
        BeatClass::Pvc => 5,
    }
}

/// Builds a record from a beat sequence. Beats are spaced by a random RR
/// interval (shorter before APC and PVC beats) with one second of lead-in and
/// lead-out. A rhythm annotation (code 28) opens the record, so not every
/// annotation is a beat.
pub fn synth_record(cfg: &SynthConfig, record_id: &str, beats: &[BeatClass], seed: u64) -> PhysicalRecord {
    assert!(cfg.n_leads == 1 || cfg.n_leads == 2, "synthetic records have one or two leads");
    let mut rng = stream_rng(seed, 0);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let fs = cfg.fs;

    let mut r_times = Vec::with_capacity(beats.len());
    let mut t = 1.0;
    for &c in beats {
        let rr: f64 = match c {
            BeatClass::Apc | BeatClass::Pvc => 0.55,
            _ => 0.80,
        } * (1.0 + 0.05 * unit.sample(&mut rng));
        t += rr.max(0.4);
        r_times.push(t);
    }
    let n = ((t + 1.0) * fs).ceil() as usize;

    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut signals: Vec<Vec<f64>> = (0..cfg.n_leads)
        .map(|lead| {
            (0..n)
                .map(|i| {
                    let s = i as f64 / fs;
                    let w = cfg.wander_mv * ((0.33 * std::f64::consts::TAU * s + phase + lead as f64).sin() * 0.7 + (0.07 * std::f64::consts::TAU * s).sin() * 0.3);
                    w + cfg.noise_mv * unit.sample(&mut rng)
                })
                .collect()
        })
        .collect();

    let mut annotations = vec![AnnotationEvent {
        sample_index: 0,
        code: 28,
        subtype: 0,
        channel: 0,
        num: 0,
        aux: Some(b"(N".to_vec()),
    }];
    for (&c, &rt) in beats.iter().zip(&r_times) {
        let r_idx = (rt * fs).round() as i64;
        let gain = 1.0 + cfg.jitter * unit.sample(&mut rng);
        for bump in morphology(c) {
            let at = bump.at + cfg.jitter * bump.at.abs().max(0.02) * unit.sample(&mut rng);
            let width = bump.width * (1.0 + cfg.jitter * unit.sample(&mut rng)).max(0.3);
            let amp_j = gain * (1.0 + cfg.jitter * unit.sample(&mut rng));
            let centre = rt + at;
            let lo = (((centre - 5.0 * width) * fs).floor().max(0.0)) as usize;
            let hi = (((centre + 5.0 * width) * fs).ceil() as usize).min(n);
            for i in lo..hi {
                let d = (i as f64 / fs - centre) / width;
                let g = (-0.5 * d * d).exp();
                for (lead, sig) in signals.iter_mut().enumerate() {
                    sig[i] += amp_j * bump.amp[lead] * g;
                }
            }
        }
        annotations.push(AnnotationEvent {
            sample_index: r_idx as u64,
            code: mit_code(c),
            subtype: 0,
            channel: 0,
            num: 0,
            aux: None,
        });
    }

    PhysicalRecord {
        record_id: record_id.to_string(),
        fs,
        signals,
        annotations,
    }
}

/// `per_class` beats of every class in a shuffled order, seeded.
pub fn balanced_sequence(per_class: usize, seed: u64) -> Vec<BeatClass> {
    use rand::seq::SliceRandom;
    let mut seq: Vec<BeatClass> = BeatClass::ALL.iter().flat_map(|&c| std::iter::repeat_n(c, per_class)).collect();
    seq.shuffle(&mut stream_rng(seed, 1));
    seq
}

/// Balanced, segmented and normalized synthetic beat windows: exactly
/// `per_class` of each class, in record order.
pub fn synth_windows(cfg: &SynthConfig, per_class: usize, seed: u64) -> Vec<BeatWindow> {
    let rec = synth_record(cfg, "synth", &balanced_sequence(per_class, seed), seed);
    let mut pre = cfg.preprocess.clone();
    pre.leads = (0..cfg.n_leads).collect();
    let out = segment_beats(&[rec], &pre).expect("synthetic record segments cleanly");
    assert_eq!(out.windows.len(), per_class * BeatClass::COUNT);
    out.windows
}
