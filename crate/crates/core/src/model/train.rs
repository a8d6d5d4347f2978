use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{argmax, window_tensor};
use super::{adam_step, AdamHyper, ModelConfig, ModelError, Network};
use crate::dataset::{BeatWindow, DatasetSplit};
use crate::nn::{self, Tensor};
use crate::rng::{derive_seed, stream_rng};
use crate::wfdb::BeatClass;

const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean weighted loss over the epoch's training examples, each measured
    /// before the update of its batch.
    pub train_loss: f64,
    /// Accuracy of those same pre-update predictions.
    pub train_accuracy: f64,
    /// Mean weighted loss on the validation bucket after the epoch.
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy (earliest
    /// on ties), or the final ones when there is no validation bucket.
    pub network: Network<f32>,
    pub history: Vec<EpochStats>,
    /// 1-based epoch the retained parameters come from; 0 if none ran.
    pub best_epoch: usize,
    /// Optimizer steps taken up to the retained parameters.
    pub best_step: u64,
}

/// Mean weighted loss and accuracy of `net` over `windows[indices]`, or
/// `None` for an empty index set.
pub fn evaluate_loss(
    net: &Network<f32>,
    windows: &[BeatWindow],
    indices: &[usize],
    weights: &[f64; BeatClass::COUNT],
) -> Result<Option<(f64, f64)>, ModelError> {
    if indices.is_empty() {
        return Ok(None);
    }
    let per: Vec<(f64, bool)> = indices
        .par_iter()
        .map(|&i| {
            let w = &windows[i];
            let (logits, _) = net.forward(&window_tensor(w)?)?;
            let (loss, _) = nn::softmax_xent(&logits, w.label.index(), weights[w.label.index()] as f32)?;
            Ok((loss as f64, argmax(logits.data()) == w.label.index()))
        })
        .collect::<Result<_, ModelError>>()?;
    let n = per.len() as f64;
    let loss = per.iter().map(|p| p.0).sum::<f64>() / n;
    let acc = per.iter().filter(|p| p.1).count() as f64 / n;
    Ok(Some((loss, acc)))
}

/// Epoch-at-a-time training driver.
pub struct Trainer<'a> {
    net: Network<f32>,
    hyper: AdamHyper,
    windows: &'a [BeatWindow],
    train: Vec<usize>,
    val: Vec<usize>,
    weights: [f64; BeatClass::COUNT],
    epoch: usize,
    step: u64,
    best: Option<(f64, Network<f32>, usize, u64)>,
    history: Vec<EpochStats>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        windows: &'a [BeatWindow],
        split: &DatasetSplit,
        config: &ModelConfig,
        hyper: &AdamHyper,
        weights: [f64; BeatClass::COUNT],
    ) -> Result<Self, ModelError> {
        Self::with_network(Network::init(config)?, windows, split, hyper, weights)
    }

    pub fn with_network(
        net: Network<f32>,
        windows: &'a [BeatWindow],
        split: &DatasetSplit,
        hyper: &AdamHyper,
        weights: [f64; BeatClass::COUNT],
    ) -> Result<Self, ModelError> {
        hyper.validate()?;
        if split.train.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        if let Some(&i) = split.train.iter().chain(&split.val).find(|&&i| i >= windows.len()) {
            return Err(ModelError::InvalidConfig(format!("split index {i} out of range for {} windows", windows.len())));
        }
        Ok(Self {
            net,
            hyper: hyper.clone(),
            windows,
            train: split.train.clone(),
            val: split.val.clone(),
            weights,
            epoch: 0,
            step: 0,
            best: None,
            history: Vec::new(),
        })
    }

    pub fn network(&self) -> &Network<f32> {
        &self.net
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn history(&self) -> &[EpochStats] {
        &self.history
    }

    pub fn run_epoch(&mut self) -> Result<EpochStats, ModelError> {
        self.epoch += 1;
        let mut order = self.train.clone();
        let seed = derive_seed(self.net.config().seed, SHUFFLE_STREAM);
        order.shuffle(&mut stream_rng(seed, self.epoch as u64));

        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for chunk in order.chunks(self.hyper.batch_size) {
            let xs: Vec<Tensor<f32>> = chunk.iter().map(|&i| window_tensor(&self.windows[i])).collect::<Result<_, _>>()?;
            let batch: Vec<(&Tensor<f32>, BeatClass, f32)> = chunk
                .iter()
                .zip(&xs)
                .map(|(&i, x)| {
                    let c = self.windows[i].label;
                    (x, c, self.weights[c.index()] as f32)
                })
                .collect();
            let out = self.net.batch_gradients(&batch)?;
            loss_sum += out.mean_loss as f64 * chunk.len() as f64;
            correct += out
                .logits
                .iter()
                .zip(&batch)
                .filter(|(z, b)| argmax(z.data()) == b.1.index())
                .count();
            self.net.zero_grad();
            self.net.accumulate(&out.grads);
            self.step += 1;
            adam_step(self.net.params_mut(), &self.hyper, self.step);
        }

        let val = evaluate_loss(&self.net, self.windows, &self.val, &self.weights)?;
        let stats = EpochStats {
            epoch: self.epoch,
            train_loss: loss_sum / order.len() as f64,
            train_accuracy: correct as f64 / order.len() as f64,
            val_loss: val.map(|v| v.0),
            val_accuracy: val.map(|v| v.1),
        };
        if let Some(acc) = stats.val_accuracy {
            if self.best.as_ref().is_none_or(|b| acc > b.0) {
                self.best = Some((acc, self.net.clone(), self.epoch, self.step));
            }
        }
        self.history.push(stats.clone());
        Ok(stats)
    }

    pub fn finish(self) -> TrainOutcome {
        match self.best {
            Some((_, network, best_epoch, best_step)) => TrainOutcome {
                network,
                history: self.history,
                best_epoch,
                best_step,
            },
            None => TrainOutcome {
                network: self.net,
                history: self.history,
                best_epoch: self.epoch,
                best_step: self.step,
            },
        }
    }
}

/// Runs `hyper.epochs` epochs, calling `on_epoch` after each.
pub fn train(
    windows: &[BeatWindow],
    split: &DatasetSplit,
    config: &ModelConfig,
    hyper: &AdamHyper,
    weights: [f64; BeatClass::COUNT],
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome, ModelError> {
    let mut t = Trainer::new(windows, split, config, hyper, weights)?;
    for _ in 0..hyper.epochs {
        let s = t.run_epoch()?;
        on_epoch(&s);
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_windows, SynthConfig};

    fn small() -> (Vec<BeatWindow>, DatasetSplit, ModelConfig) {
        let windows = synth_windows(&SynthConfig::default(), 8, 3);
        let n = windows.len();
        let split = DatasetSplit {
            seed: 0,
            train: (0..n).filter(|i| i % 4 != 0).collect(),
            val: (0..n).filter(|i| i % 4 == 0).collect(),
            test: vec![],
        };
        (windows, split, ModelConfig::default())
    }

    fn hyper(epochs: usize) -> AdamHyper {
        AdamHyper {
            epochs,
            batch_size: 8,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_stats() {
        let (w, s, c) = small();
        let a = train(&w, &s, &c, &hyper(2), [1.0; 5], |_| {}).unwrap();
        let b = train(&w, &s, &c, &hyper(2), [1.0; 5], |_| {}).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.network, b.network);
        assert_eq!(a.history.len(), 2);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let (w, s, c) = small();
        let h = AdamHyper {
            lr: 0.0,
            ..hyper(2)
        };
        let out = train(&w, &s, &c, &h, [1.0; 5], |_| {}).unwrap();
        assert_eq!(out.network, Network::init(&c).unwrap());
    }

    #[test]
    fn empty_train_bucket() {
        let (w, mut s, c) = small();
        s.train.clear();
        assert!(matches!(train(&w, &s, &c, &hyper(1), [1.0; 5], |_| {}), Err(ModelError::EmptyTrainSet)));
    }

    #[test]
    fn best_epoch_retained_and_final_without_validation() {
        let (w, s, c) = small();
        let out = train(&w, &s, &c, &hyper(3), [1.0; 5], |_| {}).unwrap();
        let accs: Vec<f64> = out.history.iter().map(|h| h.val_accuracy.unwrap()).collect();
        let best = accs.iter().cloned().fold(f64::MIN, f64::max);
        let first_best = accs.iter().position(|&a| a == best).unwrap() + 1;
        assert_eq!(out.best_epoch, first_best);
        let (acc, _) = (evaluate_loss(&out.network, &w, &s.val, &[1.0; 5]).unwrap().unwrap().1, ());
        assert_eq!(acc, best);

        let mut no_val = s.clone();
        no_val.val.clear();
        let out = train(&w, &no_val, &c, &hyper(2), [1.0; 5], |_| {}).unwrap();
        assert_eq!(out.best_epoch, 2);
        assert!(out.history.iter().all(|h| h.val_loss.is_none()));
    }

    #[test]
    fn steps_count_batches() {
        let (w, s, c) = small();
        let mut t = Trainer::new(&w, &s, &c, &hyper(1), [1.0; 5]).unwrap();
        t.run_epoch().unwrap();
        assert_eq!(t.step(), s.train.len().div_ceil(8) as u64);
    }
}
