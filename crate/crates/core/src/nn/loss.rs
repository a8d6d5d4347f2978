use super::{mismatch, NnError, Real, Tensor};

/// Softmax with the max-logit shift.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let e: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s = e.iter().fold(T::zero(), |a, &b| a + b);
    e.into_iter().map(|v| v / s).collect()
}

/// Weighted cross-entropy of `softmax(logits)` against class `target`.
/// Returns the loss and `dlogits = weight · (p - onehot(target))`.
pub fn softmax_xent<T: Real>(logits: &Tensor<T>, target: usize, weight: T) -> Result<(T, Tensor<T>), NnError> {
    let n = logits.len();
    if logits.shape().len() != 1 || target >= n {
        return Err(mismatch(format!("softmax_xent: target {target} for logits {:?}", logits.shape())));
    }
    let z = logits.data();
    let m = z.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let lse = z.iter().fold(T::zero(), |a, &v| a + (v - m).exp()).ln();
    // -ln p[target] computed in log space so saturated predictions stay exact.
    let loss = weight * (lse - (z[target] - m));
    let mut p = softmax(z);
    p[target] -= T::one();
    for v in &mut p {
        *v *= weight;
    }
    Ok((loss, Tensor::from_vec(&[n], p)?))
}
