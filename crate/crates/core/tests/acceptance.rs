//! Acceptance criteria, run in order, one PASS/FAIL line each.
//!
//! Criteria 1 and 5 need the MIT-BIH records (`ecg-beatnet fetch`) in
//! `$ECG_BEATNET_DATA` or `<workspace>/data/mitdb`; criterion 1 also needs the
//! reference dumps written by `tools/reference_dump.py`. The two-hour full
//! reproduction in criterion 5 only runs with `ECG_BEATNET_ACCEPT_FULL=1`.
//! A criterion that cannot run prints FAIL with the reason and does not fail
//! the test binary; a criterion that runs and misses its target does.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ecg_beatnet::cli::RunConfig;
use ecg_beatnet::dataset::{class_weights, BeatWindow, DatasetSplit};
use ecg_beatnet::metrics::{ConfusionMatrix, EvalReport};
use ecg_beatnet::model::{evaluate_loss, AdamHyper, ModelConfig, Network, Trainer};
use ecg_beatnet::nn::{self, grad_check, grad_check_where, GradCheckOptions, Tensor};
use ecg_beatnet::synth::{synth_windows, SynthConfig};
use ecg_beatnet::wfdb::{read_header, read_signals, verify_checksums, BeatClass, Record};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

mod common;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Could not run in this environment.
    Blocked(String),
}

fn workspace() -> PathBuf {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    p.canonicalize().unwrap_or(p)
}

fn data_dir() -> PathBuf {
    std::env::var_os("ECG_BEATNET_DATA").map_or_else(|| workspace().join("data/mitdb"), PathBuf::from)
}

fn missing_records(dir: &Path, names: &[String]) -> Vec<String> {
    names
        .iter()
        .filter(|n| ["hea", "dat", "atr"].iter().any(|e| !dir.join(format!("{n}.{e}")).exists()))
        .cloned()
        .collect()
}

// ---- 1. parser oracle ----

fn compare_record(dir: &Path, name: &str, r: &Value) -> Result<(), String> {
    let h = read_header(dir, name).map_err(|e| e.to_string())?;
    let data = read_signals(dir, &h).map_err(|e| e.to_string())?;
    let eq = |what: &str, ok: bool| if ok { Ok(()) } else { Err(format!("{name}: {what} differs")) };
    eq("record name", h.record_name == r["record_name"])?;
    eq("signal count", Some(h.n_signals as u64) == r["n_signals"].as_u64())?;
    eq("sampling frequency", Some(h.sampling_frequency) == r["fs"].as_f64())?;
    eq("sample count", Some(h.n_samples as u64) == r["n_samples"].as_u64())?;
    let checks = verify_checksums(&data, &h);
    for (i, (s, rs)) in h.signals.iter().zip(r["signals"].as_array().ok_or("signals")?).enumerate() {
        eq(&format!("signal {i} file"), s.file_name == rs["file_name"])?;
        eq(&format!("signal {i} format"), Some(s.format_code as u64) == rs["format"].as_u64())?;
        eq(&format!("signal {i} gain"), Some(s.effective_gain()) == rs["adc_gain"].as_f64())?;
        eq(&format!("signal {i} baseline"), Some(s.baseline as i64) == rs["baseline"].as_i64())?;
        eq(&format!("signal {i} resolution"), Some(s.adc_resolution as i64) == rs["adc_res"].as_i64())?;
        eq(&format!("signal {i} adc zero"), Some(s.adc_zero as i64) == rs["adc_zero"].as_i64())?;
        eq(&format!("signal {i} initial value"), Some(s.initial_value as i64) == rs["init_value"].as_i64())?;
        eq(&format!("signal {i} header checksum"), s.checksum.map(i64::from) == rs["checksum"].as_i64())?;
        eq(&format!("signal {i} description"), s.description == rs["description"])?;
        let head: Vec<i64> = rs["head"].as_array().ok_or("head")?.iter().filter_map(Value::as_i64).collect();
        let ours: Vec<i64> = data.samples[i].iter().take(1000).map(|&v| v as i64).collect();
        eq(&format!("signal {i} first 1000 samples"), ours == head)?;
        eq(&format!("signal {i} computed checksum"), Some(checks[i].computed as i64) == rs["computed_checksum"].as_i64())?;
        eq(&format!("signal {i} checksum verification"), checks[i].passed())?;
    }
    let rec = Record::load(dir, name, "atr").map_err(|e| e.to_string())?;
    let ours: Vec<(u64, u64)> = rec.annotations.iter().map(|a| (a.sample_index, a.code as u64)).collect();
    let theirs: Vec<(u64, u64)> = r["annotations"]
        .as_array()
        .ok_or("annotations")?
        .iter()
        .map(|p| (p[0].as_u64().unwrap_or(u64::MAX), p[1].as_u64().unwrap_or(u64::MAX)))
        .collect();
    eq("annotation list", ours == theirs)
}

fn parser_oracle() -> Outcome {
    let dir = data_dir();
    let names: Vec<String> = ["100", "101", "119", "207"].map(String::from).to_vec();
    let missing = missing_records(&dir, &names);
    if !missing.is_empty() {
        return Outcome::Blocked(format!("records {missing:?} not found in {}", dir.display()));
    }
    let t0 = Instant::now();
    for n in &names {
        let p = dir.join("reference").join(format!("{n}.json"));
        let Ok(text) = std::fs::read_to_string(&p) else {
            return Outcome::Blocked(format!("{} missing; run tools/reference_dump.py", p.display()));
        };
        let r: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => return Outcome::Fail(format!("{}: {e}", p.display())),
        };
        if let Err(e) = compare_record(&dir, n, &r) {
            return Outcome::Fail(e);
        }
    }
    Outcome::Pass(format!("4 records identical to the reference reader in {:.1?}", t0.elapsed()))
}

// ---- 2. gradients ----

fn randn(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
}

fn t(shape: &[usize], v: &[f64]) -> Tensor<f64> {
    Tensor::from_vec(shape, v.to_vec()).unwrap()
}

/// `<y - y0, r>`: the gradient of `<y, r>`, but outputs that a probe leaves
/// untouched cancel exactly instead of adding roundoff to the difference.
fn centered(y0: Tensor<f64>, r: &Tensor<f64>) -> impl Fn(&Tensor<f64>) -> f64 + '_ {
    move |y| y.data().iter().zip(y0.data()).zip(r.data()).map(|((a, b), c)| (a - b) * c).sum()
}

/// Worst relative error per layer over one seed. Each layer is checked
/// through the scalar `<layer(x), r>` for a random probe `r`.
fn layer_errors(seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = GradCheckOptions { seed, ..Default::default() };
    let mut out = Vec::new();

    // Convolutions at the model's L1 and L2 shapes.
    for (name, c_in, c_out, k, l) in [("conv k7", 2, 16, 7, 64), ("conv k5", 16, 16, 5, 32), ("conv k3", 16, 32, 3, 16)] {
        let (x, w, b) = (randn(&mut rng, &[c_in, l]), randn(&mut rng, &[c_out, c_in, k]), randn(&mut rng, &[c_out]));
        let r = randn(&mut rng, &[c_out, l]);
        let (mut dw, mut db) = (Tensor::zeros(w.shape()), Tensor::zeros(b.shape()));
        let dx = nn::conv1d_backward(&x, &w, &r, &mut dw, &mut db).unwrap();
        let dot = centered(nn::conv1d(&x, &w, &b).unwrap(), &r);
        let e = [
            grad_check(|v| dot(&nn::conv1d(&t(x.shape(), v), &w, &b).unwrap()), x.data(), dx.data(), &opts),
            grad_check(|v| dot(&nn::conv1d(&x, &t(w.shape(), v), &b).unwrap()), w.data(), dw.data(), &opts),
            grad_check(|v| dot(&nn::conv1d(&x, &w, &t(b.shape(), v)).unwrap()), b.data(), db.data(), &opts),
        ];
        out.push((name, e.into_iter().fold(0.0, f64::max)));
    }

    // ReLU away from its kink.
    let mut x = randn(&mut rng, &[16, 32]);
    for v in x.data_mut() {
        if v.abs() < 1e-3 {
            *v = 0.5;
        }
    }
    let r = randn(&mut rng, &[16, 32]);
    let dx = nn::relu_backward(&x, &r).unwrap();
    let dot = centered(nn::relu(&x), &r);
    out.push(("relu", grad_check(|v| dot(&nn::relu(&t(x.shape(), v))), x.data(), dx.data(), &opts)));

    // Max-pool with pair members far apart relative to the step.
    let x = randn(&mut rng, &[16, 64]);
    let mut xs = x.clone();
    for p in xs.data_mut().chunks_exact_mut(2) {
        if (p[0] - p[1]).abs() < 1e-3 {
            p[1] += 0.01;
        }
    }
    let r = randn(&mut rng, &[16, 32]);
    let pooled = nn::maxpool1d(&xs).unwrap();
    let dx = nn::maxpool1d_backward(xs.shape(), &pooled.argmax, &r).unwrap();
    let dot = centered(pooled.output, &r);
    out.push(("maxpool", grad_check(|v| dot(&nn::maxpool1d(&t(xs.shape(), v)).unwrap().output), xs.data(), dx.data(), &opts)));

    let x = randn(&mut rng, &[32, 32]);
    let r = randn(&mut rng, &[32]);
    let dx = nn::global_avg_pool_backward(x.shape(), &r).unwrap();
    let dot = centered(nn::global_avg_pool(&x).unwrap(), &r);
    out.push(("global avg pool", grad_check(|v| dot(&nn::global_avg_pool(&t(x.shape(), v)).unwrap()), x.data(), dx.data(), &opts)));

    for (name, d_in, d_out) in [("dense 32→64", 32, 64), ("dense 64→5", 64, 5)] {
        let (x, w, b) = (randn(&mut rng, &[d_in]), randn(&mut rng, &[d_out, d_in]), randn(&mut rng, &[d_out]));
        let r = randn(&mut rng, &[d_out]);
        let (mut dw, mut db) = (Tensor::zeros(w.shape()), Tensor::zeros(b.shape()));
        let dx = nn::dense_backward(&x, &w, &r, &mut dw, &mut db).unwrap();
        let dot = centered(nn::dense(&x, &w, &b).unwrap(), &r);
        let e = [
            grad_check(|v| dot(&nn::dense(&t(x.shape(), v), &w, &b).unwrap()), x.data(), dx.data(), &opts),
            grad_check(|v| dot(&nn::dense(&x, &t(w.shape(), v), &b).unwrap()), w.data(), dw.data(), &opts),
            grad_check(|v| dot(&nn::dense(&x, &w, &t(b.shape(), v)).unwrap()), b.data(), db.data(), &opts),
        ];
        out.push((name, e.into_iter().fold(0.0, f64::max)));
    }

    let z = randn(&mut rng, &[5]);
    let target = rng.random_range(0..5);
    let weight = rng.random_range(0.2..3.0);
    let (_, dz) = nn::softmax_xent(&z, target, weight).unwrap();
    out.push(("softmax xent", grad_check(|v| nn::softmax_xent(&t(&[5], v), target, weight).unwrap().0, z.data(), dz.data(), &opts)));
    out
}

/// The default model in f64 on a synthetic beat, all parameters eligible.
/// The loss is taken relative to its value at the initial parameters,
/// `log(sum_i p_i exp(d_i)) - d_t` with `d` the change in logits, so small
/// gradients are not lost in the roundoff of a loss near 1.6. Coordinates
/// whose probes flip a ReLU or a max-pool winner sit on a kink where central
/// differences mean nothing; those are skipped and replaced.
fn model_error(seed: u64, beats: &[BeatWindow]) -> (f64, usize) {
    let config = ModelConfig { seed, ..Default::default() };
    let net = Network::<f64>::init(&config).unwrap();
    let w = &beats[seed as usize % beats.len()];
    let x = Tensor::from_vec(&[w.n_leads, w.window_len()], w.samples.iter().map(|&v| v as f64).collect()).unwrap();
    let weight = 0.5 + seed as f64 * 0.2;
    let (_, _, g) = net.example_gradients(&x, w.label, weight).unwrap();
    let (z0, cache) = net.forward(&x).unwrap();
    let pattern = cache.activation_pattern();
    let p0 = nn::softmax(z0.data());
    let target = w.label.index();
    let mut probe = net.clone();
    let f = |v: &[f64]| {
        probe.set_flat_params(v);
        let (z, cache) = probe.forward(&x).unwrap();
        if cache.activation_pattern() != pattern {
            return None;
        }
        let d: Vec<f64> = z.data().iter().zip(z0.data()).map(|(a, b)| a - b).collect();
        let s: f64 = p0.iter().zip(&d).map(|(p, di)| p * di.exp_m1()).sum();
        Some(weight * (s.ln_1p() - d[target]))
    };
    let r = grad_check_where(f, &net.flat_params(), &g.flatten(), &GradCheckOptions { seed, ..Default::default() });
    assert_eq!(r.checked, 200, "seed {seed}: too few smooth coordinates");
    (r.worst, r.skipped)
}

fn gradients() -> Outcome {
    let t0 = Instant::now();
    let opts = GradCheckOptions::default();
    assert!(opts.max_coords >= 200 && opts.epsilon == 1e-5);
    let mut worst_layer = ("", 0.0f64);
    let mut worst_model = 0.0f64;
    let mut skipped = 0;
    let beats = synth_windows(&SynthConfig::default(), 2, 77);
    for seed in 0..10 {
        for (name, e) in layer_errors(seed) {
            if e > worst_layer.1 || !e.is_finite() {
                worst_layer = (name, e);
            }
        }
        let (e, s) = model_error(seed, &beats);
        worst_model = worst_model.max(e);
        skipped += s;
    }
    let detail = format!(
        "worst layer {} {:.2e} (≤ 1e-5), model {:.2e} (≤ 1e-4), 10 seeds, {skipped} kink coordinates replaced, {:.1?}",
        worst_layer.0,
        worst_layer.1,
        worst_model,
        t0.elapsed()
    );
    if worst_layer.1 <= 1e-5 && worst_model <= 1e-4 && t0.elapsed() < Duration::from_secs(60) {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---- 3. initialization ----

/// `per_class` windows of each class except `short`, which gets one fewer.
fn balanced(total: usize, seed: u64) -> Vec<BeatWindow> {
    let per = total.div_ceil(BeatClass::COUNT);
    let surplus = per * BeatClass::COUNT - total;
    let all = synth_windows(&SynthConfig::default(), per, seed);
    let mut taken = [0usize; BeatClass::COUNT];
    all.into_iter()
        .filter(|w| {
            let c = w.label.index();
            let cap = if c < surplus { per - 1 } else { per };
            taken[c] += 1;
            taken[c] <= cap
        })
        .collect()
}

fn weights_of(windows: &[BeatWindow]) -> [f64; BeatClass::COUNT] {
    class_weights(&windows.iter().map(|w| w.label).collect::<Vec<_>>()).unwrap()
}

fn initialization() -> Outcome {
    let batch = balanced(64, 31);
    assert_eq!(batch.len(), 64);
    let idx: Vec<usize> = (0..64).collect();
    let net = Network::<f32>::init(&ModelConfig::default()).unwrap();
    let (loss, _) = evaluate_loss(&net, &batch, &idx, &weights_of(&batch)).unwrap().unwrap();
    let target = 5f64.ln();
    let detail = format!("initial loss {loss:.4}, ln 5 = {target:.4}, tolerance 0.05");
    if (loss - target).abs() <= 0.05 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---- 4. overfit ----

fn overfit() -> Outcome {
    let windows = balanced(256, 7);
    let split = DatasetSplit {
        seed: 0,
        train: (0..windows.len()).collect(),
        val: vec![],
        test: vec![],
    };
    let weights = weights_of(&windows);
    let hyper = AdamHyper { epochs: 200, ..Default::default() };
    let t0 = Instant::now();
    let mut trainer = Trainer::new(&windows, &split, &ModelConfig::default(), &hyper, weights).unwrap();
    for _ in 0..hyper.epochs {
        trainer.run_epoch().unwrap();
        let (_, acc) = evaluate_loss(trainer.network(), &windows, &split.train, &weights).unwrap().unwrap();
        if acc == 1.0 {
            let elapsed = t0.elapsed();
            let detail = format!("100% of 256 training beats at epoch {} in {elapsed:.1?}", trainer.epoch());
            return if elapsed <= Duration::from_secs(120) {
                Outcome::Pass(detail)
            } else {
                Outcome::Fail(detail + " (over 2 minutes)")
            };
        }
    }
    Outcome::Fail(format!("training accuracy below 100% after 200 epochs ({:.1?})", t0.elapsed()))
}

// ---- 5. reproduction ----

fn cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ecg_beatnet::cli::run(std::iter::once("ecg-beatnet").chain(args.iter().copied()), &mut out, &mut err);
    if code == 0 {
        Ok(String::from_utf8_lossy(&out).into_owned())
    } else {
        Err(format!("`{}` exited {code}: {}", args.join(" "), String::from_utf8_lossy(&err).trim()))
    }
}

/// segment → train → eval for `cfg` in `work`; returns the report and the
/// wall time.
fn pipeline(mut cfg: RunConfig, work: &Path) -> Result<(EvalReport, Duration), String> {
    cfg.cache_path = work.join("beats.ebw");
    cfg.output_dir = work.join("runs");
    let path = work.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    let t0 = Instant::now();
    cli(&["--config", p, "segment"])?;
    cli(&["--config", p, "train"])?;
    let json = cli(&["--config", p, "eval", "--format", "json"])?;
    let elapsed = t0.elapsed();
    let report = EvalReport::from_json(&json).map_err(|e| e.to_string())?;
    Ok((report, elapsed))
}

fn per_class(r: &EvalReport) -> String {
    let f = |v: Option<f64>| v.map_or_else(|| "n/a".into(), |x| format!("{:.1}", 100.0 * x));
    r.per_class
        .iter()
        .map(|c| format!("{} se {} sp {}", c.class.name(), f(c.sensitivity), f(c.specificity)))
        .collect::<Vec<_>>()
        .join("; ")
}

fn reproduction() -> Outcome {
    let dir = data_dir();
    let subset = RunConfig::load(&workspace().join("configs/ci-subset.json")).unwrap();
    let missing = missing_records(&dir, &subset.records);
    if !missing.is_empty() {
        return Outcome::Blocked(format!("subset records {missing:?} not found in {}", dir.display()));
    }

    let work = tempfile::tempdir().unwrap();
    let cfg = RunConfig { data_dir: dir.clone(), ..subset };
    let (r, elapsed) = match pipeline(cfg, work.path()) {
        Ok(v) => v,
        Err(e) => return Outcome::Fail(e),
    };
    let sub = format!("subset {:.2}% in {elapsed:.0?}", 100.0 * r.overall_accuracy);
    if r.overall_accuracy < 0.90 || elapsed > Duration::from_secs(600) {
        return Outcome::Fail(sub + " (needs ≥ 90% within 10 min)");
    }
    if std::env::var("ECG_BEATNET_ACCEPT_FULL").as_deref() != Ok("1") {
        return Outcome::Blocked(sub + "; full 48-record run not requested (ECG_BEATNET_ACCEPT_FULL=1)");
    }
    let full = RunConfig::load(&workspace().join("configs/full.json")).unwrap();
    let missing = missing_records(&dir, &full.records);
    if !missing.is_empty() {
        return Outcome::Blocked(format!("{sub}; {} of 48 records not found for the full run", missing.len()));
    }
    let work = tempfile::tempdir().unwrap();
    let (r, elapsed) = match pipeline(RunConfig { data_dir: dir, ..full }, work.path()) {
        Ok(v) => v,
        Err(e) => return Outcome::Fail(e),
    };
    let detail = format!(
        "{sub}; full {:.2}% on {} test beats in {elapsed:.0?} ({})",
        100.0 * r.overall_accuracy,
        r.n_total,
        per_class(&r)
    );
    if r.overall_accuracy >= 0.95 && elapsed <= Duration::from_secs(7200) {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---- 6. determinism ----

fn determinism() -> Outcome {
    let data = tempfile::tempdir().unwrap();
    let names = ["800", "801", "802"];
    common::write_synth_records(data.path(), &names, 16);
    let mut cfg = RunConfig {
        data_dir: data.path().to_path_buf(),
        records: names.map(String::from).to_vec(),
        ..Default::default()
    };
    cfg.optimizer.epochs = 5;
    cfg.split.seed = 11;
    cfg.model.seed = 11;

    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for w in &runs {
        if let Err(e) = pipeline(cfg.clone(), w.path()) {
            return Outcome::Fail(e);
        }
    }
    let files = ["beats.ebw", "runs/model.ebnc", "runs/eval.json", "runs/train.jsonl"];
    for f in files {
        let a = std::fs::read(runs[0].path().join(f)).unwrap();
        let b = std::fs::read(runs[1].path().join(f)).unwrap();
        if a != b {
            return Outcome::Fail(format!("{f} differs between runs"));
        }
    }
    Outcome::Pass("cache, checkpoint, report and log byte-identical across two synthetic 3-record runs".into())
}

// ---- 7. metrics oracle ----

/// Expands a matrix into (truth, predicted) pairs and counts each binary
/// reduction directly.
fn brute_force(counts: &[[u64; 5]; 5]) -> (f64, Vec<(Option<f64>, Option<f64>)>) {
    let pairs: Vec<(usize, usize)> = (0..5)
        .flat_map(|i| (0..5).flat_map(move |j| std::iter::repeat_n((i, j), counts[i][j] as usize)))
        .collect();
    let correct = pairs.iter().filter(|(a, b)| a == b).count();
    let acc = correct as f64 / pairs.len() as f64;
    let per = (0..5)
        .map(|c| {
            let (mut tp, mut fn_, mut fp, mut tn) = (0u64, 0u64, 0u64, 0u64);
            for &(truth, pred) in &pairs {
                match (truth == c, pred == c) {
                    (true, true) => tp += 1,
                    (true, false) => fn_ += 1,
                    (false, true) => fp += 1,
                    (false, false) => tn += 1,
                }
            }
            let ratio = |n: u64, d: u64| (d > 0).then(|| n as f64 / d as f64);
            (ratio(tp, tp + fn_), ratio(tn, tn + fp))
        })
        .collect();
    (acc, per)
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for m in 0..1000 {
        let mut counts = [[0u64; 5]; 5];
        for row in counts.iter_mut() {
            for cell in row.iter_mut() {
                // Plenty of zeros so undefined metrics come up.
                *cell = if rng.random_bool(0.3) { 0 } else { rng.random_range(0..40) };
            }
        }
        if m % 50 == 0 {
            counts[m / 50 % 5] = [0; 5];
        }
        let cm = ConfusionMatrix::from_counts(counts);
        if cm.total() == 0 {
            continue;
        }
        let (acc, per) = brute_force(&counts);
        if cm.overall_accuracy().unwrap() != acc {
            return Outcome::Fail(format!("matrix {m}: accuracy"));
        }
        for c in BeatClass::ALL {
            if (cm.sensitivity(c), cm.specificity(c)) != per[c.index()] {
                return Outcome::Fail(format!("matrix {m}: class {c}"));
            }
        }
    }
    Outcome::Pass("1000 random matrices match the brute-force reduction exactly".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("parser oracle equivalence", parser_oracle),
        ("gradient correctness", gradients),
        ("initialization sanity", initialization),
        ("overfit smoke test", overfit),
        ("desk-scale reproduction", reproduction),
        ("determinism", determinism),
        ("metrics oracle", metrics_oracle),
    ];
    let mut failed = Vec::new();
    // Written straight to stdout so the lines show without --nocapture.
    let mut out = std::io::stdout().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let line = match run() {
            Outcome::Pass(d) => format!("PASS  {}. {name}: {d}", i + 1),
            Outcome::Fail(d) => {
                failed.push(i + 1);
                format!("FAIL  {}. {name}: {d}", i + 1)
            }
            Outcome::Blocked(d) => format!("FAIL  {}. {name}: not run: {d}", i + 1),
        };
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
    }
    assert!(failed.is_empty(), "criteria {failed:?} failed");
}
