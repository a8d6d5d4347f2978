//! Baseline removal and beat segmentation on a synthetic recording.

use ecg_beatnet::dataset::{remove_baseline, segment_beats, PreprocessConfig};
use ecg_beatnet::synth::{balanced_sequence, synth_record, SynthConfig};

fn main() {
    let cfg = SynthConfig {
        wander_mv: 0.8,
        ..Default::default()
    };
    let rec = synth_record(&cfg, "demo", &balanced_sequence(20, 1), 1);
    let lead = &rec.signals[0];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let pre = PreprocessConfig::default();
    let flat = remove_baseline(lead, rec.fs, pre.median_win_1, pre.median_win_2);
    println!("{} samples, lead 0 mean {:.3} mV before and {:.3} mV after baseline removal", lead.len(), mean(lead), mean(&flat));

    let seg = segment_beats(std::slice::from_ref(&rec), &pre).expect("default config is valid");
    let s = &seg.stats;
    println!(
        "{} annotations: {} windows, {} not a target class, {} too close to an edge",
        s.annotations, s.emitted, s.unmapped, s.boundary_dropped
    );
    println!("windows per class [N, L, R, A, V]: {:?}", s.per_class);

    let w = &seg.windows[0];
    let lead0 = w.channel(0);
    let m = lead0.iter().sum::<f32>() / lead0.len() as f32;
    let sd = (lead0.iter().map(|v| (v - m).powi(2)).sum::<f32>() / lead0.len() as f32).sqrt();
    println!("first window: {} at sample {}, {}×{}, lead 0 mean {m:.2e} std {sd:.4}", w.label, w.r_sample, w.n_leads, w.window_len());
}
