//! Saves a trained network and restores it bit for bit.

use ecg_beatnet::dataset::DatasetSplit;
use ecg_beatnet::model::{load_checkpoint, predict, save_checkpoint, window_tensor, AdamHyper, CheckpointMeta, ModelConfig, Trainer};
use ecg_beatnet::synth::{synth_windows, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let windows = synth_windows(&SynthConfig::default(), 10, 9);
    let split = DatasetSplit {
        seed: 9,
        train: (0..windows.len()).collect(),
        val: Vec::new(),
        test: Vec::new(),
    };
    let config = ModelConfig { seed: 9, ..Default::default() };
    let mut trainer = Trainer::new(&windows, &split, &config, &AdamHyper::default(), [1.0; 5])?;
    trainer.run_epoch()?;
    let meta = CheckpointMeta {
        epoch: trainer.epoch() as u32,
        split_seed: split.seed,
        step: trainer.step(),
    };

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.ebnc");
    save_checkpoint(&path, trainer.network(), &meta)?;
    println!("wrote {} bytes for {} parameters", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), trainer.network().param_count());

    let ck = load_checkpoint(&path, &config)?;
    assert_eq!(&ck.network, trainer.network());
    println!("restored epoch {}, step {}, split seed {}", ck.meta.epoch, ck.meta.step, ck.meta.split_seed);

    let x = window_tensor(&windows[0])?;
    let (a, b) = (predict(trainer.network(), &x)?, predict(&ck.network, &x)?);
    assert_eq!(a.probabilities, b.probabilities);
    println!("identical prediction: {} {:?}", b.class, b.probabilities);

    // A checkpoint for another window length is refused.
    let other = ModelConfig { window_len: 128, ..config };
    println!("loading with window_len 128: {}", load_checkpoint(&path, &other).unwrap_err());
    Ok(())
}
