use super::{mismatch, NnError, Real, Tensor};

fn dims2<T: Real>(x: &Tensor<T>, what: &str) -> Result<(usize, usize), NnError> {
    match *x.shape() {
        [a, b] => Ok((a, b)),
        ref s => Err(mismatch(format!("{what}: expected rank 2, got {s:?}"))),
    }
}

fn conv_dims<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<(usize, usize, usize, usize), NnError> {
    let (c_in, l) = dims2(x, "conv1d input")?;
    let [c_out, wc, k] = *w.shape() else {
        return Err(mismatch(format!("conv1d weight: expected rank 3, got {:?}", w.shape())));
    };
    if wc != c_in {
        return Err(mismatch(format!("conv1d: input has {c_in} channels, weight expects {wc}")));
    }
    if k % 2 == 0 {
        return Err(mismatch(format!("conv1d: kernel size {k} is even")));
    }
    b.expect_shape(&[c_out], "conv1d bias")?;
    Ok((c_in, l, c_out, k))
}

/// Valid output range for tap `k` with padding `p`: positions `t` such that
/// `t + k - p` lies inside `0..l`.
#[inline]
fn tap_range(k: usize, p: usize, l: usize) -> Option<(usize, usize)> {
    let lo = p.saturating_sub(k);
    let hi = (l + p).saturating_sub(k).min(l);
    (lo < hi).then_some((lo, hi))
}

/// Stride-1 cross-correlation with "same" zero padding:
/// `y[o,t] = b[o] + Σ_{c,k} x[c, t+k-P] · w[o,c,k]`, `P = (K-1)/2`.
pub fn conv1d<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    let (c_in, l, c_out, k) = conv_dims(x, w, b)?;
    let p = (k - 1) / 2;
    let mut y = Tensor::zeros(&[c_out, l]);
    let (xd, wd) = (x.data(), w.data());
    for (o, yo) in y.data_mut().chunks_exact_mut(l).enumerate() {
        yo.fill(b.data()[o]);
        for c in 0..c_in {
            let xc = &xd[c * l..(c + 1) * l];
            for kk in 0..k {
                let wv = wd[(o * c_in + c) * k + kk];
                let Some((lo, hi)) = tap_range(kk, p, l) else { continue };
                let src = &xc[lo + kk - p..hi + kk - p];
                for (yv, &xv) in yo[lo..hi].iter_mut().zip(src) {
                    *yv += wv * xv;
                }
            }
        }
    }
    Ok(y)
}

/// Returns `dx`; adds into `dw` and `db`.
pub fn conv1d_backward<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    dy: &Tensor<T>,
    dw: &mut Tensor<T>,
    db: &mut Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    let (c_in, l, c_out, k) = conv_dims(x, w, db)?;
    dy.expect_shape(&[c_out, l], "conv1d upstream gradient")?;
    dw.expect_shape(w.shape(), "conv1d weight gradient")?;
    let p = (k - 1) / 2;
    let mut dx = Tensor::zeros(&[c_in, l]);
    let (xd, wd) = (x.data(), w.data());
    let dxd = dx.data_mut();
    let dwd = dw.data_mut();
    for o in 0..c_out {
        let dyo = dy.row(o);
        db.data_mut()[o] += dyo.iter().fold(T::zero(), |a, &v| a + v);
        for c in 0..c_in {
            let xc = &xd[c * l..(c + 1) * l];
            let dxc = &mut dxd[c * l..(c + 1) * l];
            for kk in 0..k {
                let wi = (o * c_in + c) * k + kk;
                let Some((lo, hi)) = tap_range(kk, p, l) else { continue };
                let (s0, s1) = (lo + kk - p, hi + kk - p);
                let mut acc = T::zero();
                for (&g, &xv) in dyo[lo..hi].iter().zip(&xc[s0..s1]) {
                    acc += g * xv;
                }
                dwd[wi] += acc;
                let wv = wd[wi];
                for (d, &g) in dxc[s0..s1].iter_mut().zip(&dyo[lo..hi]) {
                    *d += wv * g;
                }
            }
        }
    }
    Ok(dx)
}

pub fn relu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let mut y = x.clone();
    for v in y.data_mut() {
        *v = v.max(T::zero());
    }
    y
}

/// Passes `dy` where the forward input was strictly positive.
pub fn relu_backward<T: Real>(x: &Tensor<T>, dy: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    dy.expect_shape(x.shape(), "relu upstream gradient")?;
    let data = x
        .data()
        .iter()
        .zip(dy.data())
        .map(|(&xv, &g)| if xv > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::from_vec(x.shape(), data)
}

/// Max-pool output and, for each output cell, the flat input index it came
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled<T> {
    pub output: Tensor<T>,
    pub argmax: Vec<usize>,
}

/// Window 2, stride 2. Ties go to the lower index.
pub fn maxpool1d<T: Real>(x: &Tensor<T>) -> Result<Pooled<T>, NnError> {
    let (c, l) = dims2(x, "maxpool input")?;
    if l % 2 != 0 {
        return Err(NnError::OddLength(l));
    }
    let mut out = Vec::with_capacity(c * l / 2);
    let mut argmax = Vec::with_capacity(c * l / 2);
    for (i, pair) in x.data().chunks_exact(2).enumerate() {
        let pick = if pair[1] > pair[0] { 1 } else { 0 };
        out.push(pair[pick]);
        argmax.push(2 * i + pick);
    }
    Ok(Pooled {
        output: Tensor::from_vec(&[c, l / 2], out)?,
        argmax,
    })
}

pub fn maxpool1d_backward<T: Real>(
    input_shape: &[usize],
    argmax: &[usize],
    dy: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    if dy.len() != argmax.len() || input_shape.iter().product::<usize>() != 2 * argmax.len() {
        return Err(mismatch(format!(
            "maxpool backward: {} gradients, {} argmax entries, input {input_shape:?}",
            dy.len(),
            argmax.len()
        )));
    }
    let mut dx = Tensor::zeros(input_shape);
    let dxd = dx.data_mut();
    for (&i, &g) in argmax.iter().zip(dy.data()) {
        dxd[i] += g;
    }
    Ok(dx)
}

pub fn global_avg_pool<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    let (c, l) = dims2(x, "global average pool input")?;
    let inv = T::one() / T::of(l as f64);
    let data = (0..c).map(|i| x.row(i).iter().fold(T::zero(), |a, &v| a + v) * inv).collect();
    Tensor::from_vec(&[c], data)
}

pub fn global_avg_pool_backward<T: Real>(input_shape: &[usize], dy: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    let [c, l] = *input_shape else {
        return Err(mismatch(format!("global average pool: input shape {input_shape:?}")));
    };
    dy.expect_shape(&[c], "global average pool upstream gradient")?;
    let inv = T::one() / T::of(l as f64);
    let data = dy.data().iter().flat_map(|&g| std::iter::repeat_n(g * inv, l)).collect();
    Tensor::from_vec(input_shape, data)
}

fn dense_dims<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<(usize, usize), NnError> {
    let [d_out, d_in] = *w.shape() else {
        return Err(mismatch(format!("dense weight: expected rank 2, got {:?}", w.shape())));
    };
    x.expect_shape(&[d_in], "dense input")?;
    b.expect_shape(&[d_out], "dense bias")?;
    Ok((d_in, d_out))
}

/// `y = w·x + b`.
pub fn dense<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    let (d_in, d_out) = dense_dims(x, w, b)?;
    let data = (0..d_out)
        .map(|o| {
            let row = &w.data()[o * d_in..(o + 1) * d_in];
            row.iter().zip(x.data()).fold(b.data()[o], |a, (&wv, &xv)| a + wv * xv)
        })
        .collect();
    Tensor::from_vec(&[d_out], data)
}

/// Returns `dx = wᵀ·dy`; adds `dy ⊗ x` into `dw` and `dy` into `db`.
pub fn dense_backward<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    dy: &Tensor<T>,
    dw: &mut Tensor<T>,
    db: &mut Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    let (d_in, d_out) = dense_dims(x, w, db)?;
    dy.expect_shape(&[d_out], "dense upstream gradient")?;
    dw.expect_shape(w.shape(), "dense weight gradient")?;
    let mut dx = Tensor::zeros(&[d_in]);
    for (o, &g) in dy.data().iter().enumerate() {
        db.data_mut()[o] += g;
        let row = &w.data()[o * d_in..(o + 1) * d_in];
        let drow = &mut dw.data_mut()[o * d_in..(o + 1) * d_in];
        for ((d, &xv), (dxv, &wv)) in drow.iter_mut().zip(x.data()).zip(dx.data_mut().iter_mut().zip(row)) {
            *d += g * xv;
            *dxv += g * wv;
        }
    }
    Ok(dx)
}
