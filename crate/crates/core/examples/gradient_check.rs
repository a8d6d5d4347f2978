//! Backpropagation through the full network against finite differences.
//!
//! The model is evaluated in f64. Coordinates whose ±ε probes change which
//! ReLUs fire or which max-pool input wins are replaced, since central
//! differences straddling a kink say nothing about the gradient.

use ecg_beatnet::model::{ModelConfig, Network};
use ecg_beatnet::nn::{self, grad_check_where, GradCheckOptions, Tensor};
use ecg_beatnet::synth::{synth_windows, SynthConfig};

fn main() {
    let beats = synth_windows(&SynthConfig::default(), 1, 5);
    for (seed, w) in beats.iter().enumerate() {
        let net = Network::<f64>::init(&ModelConfig { seed: seed as u64, ..Default::default() }).unwrap();
        let x = Tensor::from_vec(&[w.n_leads, w.window_len()], w.samples.iter().map(|&v| v as f64).collect()).unwrap();
        let (loss, _, grads) = net.example_gradients(&x, w.label, 1.0).unwrap();
        let (_, cache) = net.forward(&x).unwrap();
        let pattern = cache.activation_pattern();

        let mut probe = net.clone();
        let f = |v: &[f64]| {
            probe.set_flat_params(v);
            let (z, c) = probe.forward(&x).unwrap();
            (c.activation_pattern() == pattern).then(|| nn::softmax_xent(&z, w.label.index(), 1.0).unwrap().0)
        };
        let opts = GradCheckOptions { seed: seed as u64, ..Default::default() };
        let r = grad_check_where(f, &net.flat_params(), &grads.flatten(), &opts);
        println!(
            "{:<5} loss {loss:.4}: {} coordinates, worst relative error {:.2e}, {} skipped at kinks",
            w.label.to_string(),
            r.checked,
            r.worst,
            r.skipped
        );
    }
}
