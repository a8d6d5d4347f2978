use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::nn::{Param, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 64,
            epochs: 30,
        }
    }
}

impl AdamHyper {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.lr >= 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.batch_size > 0;
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidConfig(format!("optimizer settings {self:?}")))
        }
    }
}

/// One bias-corrected Adam update at step `t >= 1`, then zeroes the
/// gradients.
pub fn adam_step<T: Real>(params: &mut [Param<T>], hyper: &AdamHyper, t: u64) {
    assert!(t >= 1, "Adam steps are numbered from 1");
    let (b1, b2) = (T::of(hyper.beta1), T::of(hyper.beta2));
    let c1 = T::of(1.0 - hyper.beta1.powf(t as f64));
    let c2 = T::of(1.0 - hyper.beta2.powf(t as f64));
    let (lr, eps) = (T::of(hyper.lr), T::of(hyper.eps));
    let one = T::one();
    for p in params {
        let n = p.value.len();
        let (value, grad, m, v) = (p.value.data_mut(), p.grad.data(), p.m.data_mut(), p.v.data_mut());
        for i in 0..n {
            let g = grad[i];
            m[i] = b1 * m[i] + (one - b1) * g;
            v[i] = b2 * v[i] + (one - b2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        p.zero_grad();
    }
}
