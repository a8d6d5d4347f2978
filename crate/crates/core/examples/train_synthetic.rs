//! Trains the classifier on synthetic beats and reports held-out metrics.

use ecg_beatnet::dataset::{class_weights, stratified_split, SplitFractions};
use ecg_beatnet::metrics::{ConfusionMatrix, EvalReport};
use ecg_beatnet::model::{predict, train, window_tensor, AdamHyper, ModelConfig};
use ecg_beatnet::synth::{synth_windows, SynthConfig};

fn main() {
    let windows = synth_windows(&SynthConfig::default(), 60, 42);
    let labels: Vec<_> = windows.iter().map(|w| w.label).collect();
    let split = stratified_split(&labels, SplitFractions::default(), 42).unwrap();
    let train_labels: Vec<_> = split.train.iter().map(|&i| labels[i]).collect();
    let weights = class_weights(&train_labels).unwrap();
    println!("{} train, {} val, {} test beats", split.train.len(), split.val.len(), split.test.len());

    let hyper = AdamHyper { epochs: 8, ..Default::default() };
    let outcome = train(&windows, &split, &ModelConfig::default(), &hyper, weights, |s| {
        println!(
            "epoch {:>2}  train loss {:.4} acc {:.3}  val acc {:.3}",
            s.epoch,
            s.train_loss,
            s.train_accuracy,
            s.val_accuracy.unwrap_or(f64::NAN)
        );
    })
    .unwrap();
    println!("keeping epoch {}", outcome.best_epoch);

    let mut cm = ConfusionMatrix::new();
    for &i in &split.test {
        let w = &windows[i];
        cm.accumulate(w.label, predict(&outcome.network, &window_tensor(w).unwrap()).unwrap().class);
    }
    print!("{}", EvalReport::from_matrix(&cm).unwrap().to_text());
}
