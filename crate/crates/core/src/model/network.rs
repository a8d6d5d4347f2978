use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::Normal;
use rayon::prelude::*;

use super::{ModelConfig, ModelError, N_CLASSES};
use crate::dataset::BeatWindow;
use crate::nn::{self, Param, Real, Tensor};
use crate::rng::stream_rng;
use crate::wfdb::BeatClass;

/// Multiplier on the He standard deviation of the output layer (L6). Plain
/// He gives logits with a standard deviation near 1 and an initial loss well
/// above ln 5; shrinking the last layer keeps the initial softmax close to
/// uniform while every hidden layer stays on the He scale.
pub const OUTPUT_INIT_SCALE: f64 = 0.1;

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

// Parameter slots: weight at 2i, bias at 2i+1 for layer i.
const L1: usize = 0;
const L2: usize = 2;
const L3: usize = 4;
const L4: usize = 6;
const L5: usize = 8;
const L6: usize = 10;

/// Parameters of one model instance.
///
/// Every mutation of the weights assigns a new version; a [`ForwardCache`]
/// remembers the version it was computed under and `backward` refuses a
/// cache from any other.
#[derive(Debug, Clone)]
pub struct Network<T> {
    config: ModelConfig,
    params: Vec<Param<T>>,
    version: u64,
}

/// Compares configuration and parameter values; optimizer state and
/// gradients are ignored.
impl<T: Real> PartialEq for Network<T> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params.iter().zip(&other.params).all(|(a, b)| a.value == b.value)
    }
}

/// Parameter gradients for one example or one batch, laid out like the
/// network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub tensors: Vec<Tensor<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros(config: &ModelConfig) -> Self {
        Self {
            tensors: config.param_shapes().iter().map(|(_, s)| Tensor::zeros(s)).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients<T>) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_scaled(b, T::one());
        }
    }

    pub fn scale(&mut self, s: T) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn flatten(&self) -> Vec<T> {
        self.tensors.iter().flat_map(|t| t.data().iter().copied()).collect()
    }
}

/// Everything backward needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    version: u64,
    x: Tensor<T>,
    z1: Tensor<T>,
    am1: Vec<usize>,
    p1: Tensor<T>,
    z2: Tensor<T>,
    a2: Tensor<T>,
    s: Tensor<T>,
    am2: Vec<usize>,
    p2: Tensor<T>,
    z4: Tensor<T>,
    am4: Vec<usize>,
    p4: Tensor<T>,
    g: Tensor<T>,
    z5: Tensor<T>,
    a5: Tensor<T>,
    logits: Tensor<T>,
}

impl<T: Real> ForwardCache<T> {
    pub fn logits(&self) -> &Tensor<T> {
        &self.logits
    }

    /// Shapes after each stage: L1 conv, pool, residual block, pool, L4 conv,
    /// pool, global average pool, L5, L6.
    pub fn shape_trace(&self) -> Vec<Vec<usize>> {
        [&self.z1, &self.p1, &self.s, &self.p2, &self.z4, &self.p4, &self.g, &self.z5, &self.logits]
            .iter()
            .map(|t| t.shape().to_vec())
            .collect()
    }

    /// Output of the residual block before pooling, `ReLU(x + branch)`.
    pub fn residual_output(&self) -> Tensor<T> {
        nn::relu(&self.s)
    }

    /// Input to the residual block.
    pub fn residual_input(&self) -> &Tensor<T> {
        &self.p1
    }

    /// Which ReLUs are active and which max-pool inputs won. Inputs that
    /// share a pattern lie on the same linear piece of the network below
    /// the softmax, so finite differences between them are meaningful.
    pub fn activation_pattern(&self) -> ActivationPattern {
        let active = [&self.z1, &self.z2, &self.s, &self.z4, &self.z5]
            .iter()
            .flat_map(|t| t.data().iter().map(|&v| v > T::zero()))
            .collect();
        let winners = [&self.am1, &self.am2, &self.am4].iter().flat_map(|a| a.iter().copied()).collect();
        ActivationPattern { active, winners }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationPattern {
    pub active: Vec<bool>,
    pub winners: Vec<usize>,
}

impl<T: Real> Network<T> {
    /// He-normal weights, `std = sqrt(2 / fan_in)` (times
    /// [`OUTPUT_INIT_SCALE`] for L6), each layer drawn from its own generator
    /// seeded by `(config.seed, layer index)`; zero biases.
    pub fn init(config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut params = Vec::with_capacity(12);
        for (i, layer) in config.layers().iter().enumerate() {
            let mut rng = stream_rng(config.seed, i as u64);
            let scale = if i == 5 { OUTPUT_INIT_SCALE } else { 1.0 };
            let dist = Normal::new(0.0, scale * (2.0 / layer.fan_in() as f64).sqrt()).unwrap();
            let shape = layer.weight_shape();
            let n = shape.iter().product();
            let w: Vec<T> = (0..n).map(|_| T::of(rng.sample(dist))).collect();
            params.push(Param::new(Tensor::from_vec(&shape, w)?));
            params.push(Param::new(Tensor::zeros(&[layer.bias_len()])));
        }
        Ok(Self {
            config: config.clone(),
            params,
            version: fresh_version(),
        })
    }

    /// Builds a network from explicit parameter values, checked against the
    /// config's layer table.
    pub fn from_values(config: &ModelConfig, values: Vec<Tensor<T>>) -> Result<Self, ModelError> {
        config.validate()?;
        let shapes = config.param_shapes();
        if values.len() != shapes.len() {
            return Err(ModelError::Nn(nn::NnError::ShapeMismatch(format!(
                "{} parameter tensors, expected {}",
                values.len(),
                shapes.len()
            ))));
        }
        for ((name, s), v) in shapes.iter().zip(&values) {
            v.expect_shape(s, name)?;
        }
        Ok(Self {
            config: config.clone(),
            params: values.into_iter().map(Param::new).collect(),
            version: fresh_version(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &[Param<T>] {
        &self.params
    }

    /// Mutable access; the network gets a new version, so outstanding
    /// caches become stale.
    pub fn params_mut(&mut self) -> &mut [Param<T>] {
        self.version = fresh_version();
        &mut self.params
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<T> {
        self.params.iter().flat_map(|p| p.value.data().iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[T]) {
        assert_eq!(flat.len(), self.param_count());
        let mut off = 0;
        for p in self.params_mut() {
            let n = p.value.len();
            p.value.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            config: self.config.clone(),
            params: self.params.iter().map(Param::cast).collect(),
            version: fresh_version(),
        }
    }

    fn w(&self, slot: usize) -> &Tensor<T> {
        &self.params[slot].value
    }

    fn b(&self, slot: usize) -> &Tensor<T> {
        &self.params[slot + 1].value
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ForwardCache<T>), ModelError> {
        x.expect_shape(&[self.config.in_channels, self.config.window_len], "model input")?;
        let z1 = nn::conv1d(x, self.w(L1), self.b(L1))?;
        let pool1 = nn::maxpool1d(&nn::relu(&z1))?;
        let p1 = pool1.output;
        let z2 = nn::conv1d(&p1, self.w(L2), self.b(L2))?;
        let a2 = nn::relu(&z2);
        let mut s = nn::conv1d(&a2, self.w(L3), self.b(L3))?;
        s.add_scaled(&p1, T::one());
        let pool2 = nn::maxpool1d(&nn::relu(&s))?;
        let p2 = pool2.output;
        let z4 = nn::conv1d(&p2, self.w(L4), self.b(L4))?;
        let pool4 = nn::maxpool1d(&nn::relu(&z4))?;
        let p4 = pool4.output;
        let g = nn::global_avg_pool(&p4)?;
        let z5 = nn::dense(&g, self.w(L5), self.b(L5))?;
        let a5 = nn::relu(&z5);
        let logits = nn::dense(&a5, self.w(L6), self.b(L6))?;
        #[cfg(debug_assertions)]
        logits.check_finite("logits")?;
        let cache = ForwardCache {
            version: self.version,
            x: x.clone(),
            z1,
            am1: pool1.argmax,
            p1,
            z2,
            a2,
            s,
            am2: pool2.argmax,
            p2,
            z4,
            am4: pool4.argmax,
            p4,
            g,
            z5,
            a5,
            logits: logits.clone(),
        };
        Ok((logits, cache))
    }

    /// Adds the parameter gradients of one example into `grads`.
    pub fn backward(&self, cache: &ForwardCache<T>, dlogits: &Tensor<T>, grads: &mut Gradients<T>) -> Result<(), ModelError> {
        if cache.version != self.version {
            return Err(ModelError::StaleCache);
        }
        dlogits.expect_shape(&[N_CLASSES], "dlogits")?;
        let gt = &mut grads.tensors;
        let (l6, rest) = gt.split_at_mut(L6);
        let (w6, b6) = rest.split_at_mut(1);
        let da5 = nn::dense_backward(&cache.a5, self.w(L6), dlogits, &mut w6[0], &mut b6[0])?;
        let dz5 = nn::relu_backward(&cache.z5, &da5)?;
        let (head, l5) = l6.split_at_mut(L5);
        let (w5, b5) = l5.split_at_mut(1);
        let dg = nn::dense_backward(&cache.g, self.w(L5), &dz5, &mut w5[0], &mut b5[0])?;
        let dp4 = nn::global_avg_pool_backward(cache.p4.shape(), &dg)?;
        let da4 = nn::maxpool1d_backward(cache.z4.shape(), &cache.am4, &dp4)?;
        let dz4 = nn::relu_backward(&cache.z4, &da4)?;
        let (head, l4) = head.split_at_mut(L4);
        let (w4, b4) = l4.split_at_mut(1);
        let dp2 = nn::conv1d_backward(&cache.p2, self.w(L4), &dz4, &mut w4[0], &mut b4[0])?;
        let dr = nn::maxpool1d_backward(cache.s.shape(), &cache.am2, &dp2)?;
        let ds = nn::relu_backward(&cache.s, &dr)?;
        let (head, l3) = head.split_at_mut(L3);
        let (w3, b3) = l3.split_at_mut(1);
        let da2 = nn::conv1d_backward(&cache.a2, self.w(L3), &ds, &mut w3[0], &mut b3[0])?;
        let dz2 = nn::relu_backward(&cache.z2, &da2)?;
        let (head, l2) = head.split_at_mut(L2);
        let (w2, b2) = l2.split_at_mut(1);
        let mut dp1 = nn::conv1d_backward(&cache.p1, self.w(L2), &dz2, &mut w2[0], &mut b2[0])?;
        dp1.add_scaled(&ds, T::one());
        let da1 = nn::maxpool1d_backward(cache.z1.shape(), &cache.am1, &dp1)?;
        let dz1 = nn::relu_backward(&cache.z1, &da1)?;
        let (w1, b1) = head.split_at_mut(1);
        nn::conv1d_backward(&cache.x, self.w(L1), &dz1, &mut w1[0], &mut b1[0])?;
        Ok(())
    }

    /// Weighted loss, logits and parameter gradients for one example.
    pub fn example_gradients(&self, x: &Tensor<T>, target: BeatClass, weight: T) -> Result<(T, Tensor<T>, Gradients<T>), ModelError> {
        let (logits, cache) = self.forward(x)?;
        let (loss, dlogits) = nn::softmax_xent(&logits, target.index(), weight)?;
        let mut g = Gradients::zeros(&self.config);
        self.backward(&cache, &dlogits, &mut g)?;
        Ok((loss, logits, g))
    }

    /// Mean loss and mean gradient over a batch. Examples run in parallel;
    /// their gradients are summed in example order so the result does not
    /// depend on the thread schedule.
    pub fn batch_gradients(&self, batch: &[(&Tensor<T>, BeatClass, T)]) -> Result<BatchResult<T>, ModelError> {
        let per: Vec<(T, Tensor<T>, Gradients<T>)> = batch
            .par_iter()
            .map(|&(x, c, w)| self.example_gradients(x, c, w))
            .collect::<Result<_, _>>()?;
        let mut grads = Gradients::zeros(&self.config);
        let mut loss = T::zero();
        let mut logits = Vec::with_capacity(per.len());
        for (l, z, g) in per {
            loss += l;
            grads.add(&g);
            logits.push(z);
        }
        let inv = T::one() / T::of(batch.len().max(1) as f64);
        grads.scale(inv);
        Ok(BatchResult {
            mean_loss: loss * inv,
            grads,
            logits,
        })
    }

    /// Adds `grads` into each parameter's gradient buffer.
    pub fn accumulate(&mut self, grads: &Gradients<T>) {
        for (p, g) in self.params.iter_mut().zip(&grads.tensors) {
            p.grad.add_scaled(g, T::one());
        }
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Param::zero_grad);
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult<T> {
    pub mean_loss: T,
    pub grads: Gradients<T>,
    pub logits: Vec<Tensor<T>>,
}

pub fn window_tensor(w: &BeatWindow) -> Result<Tensor<f32>, ModelError> {
    Ok(Tensor::from_vec(&[w.n_leads, w.window_len()], w.samples.clone())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: BeatClass,
    pub probabilities: [f32; N_CLASSES],
}

pub(crate) fn argmax(v: &[f32]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Softmax probabilities and their argmax; ties go to the lower class index.
pub fn predict(net: &Network<f32>, x: &Tensor<f32>) -> Result<Prediction, ModelError> {
    let (logits, _) = net.forward(x)?;
    Ok(prediction_from_logits(logits.data()))
}

pub(crate) fn prediction_from_logits(logits: &[f32]) -> Prediction {
    let p = nn::softmax(logits);
    let mut probabilities = [0.0; N_CLASSES];
    probabilities.copy_from_slice(&p);
    Prediction {
        class: BeatClass::from_index(argmax(logits)).expect("five logits"),
        probabilities,
    }
}
