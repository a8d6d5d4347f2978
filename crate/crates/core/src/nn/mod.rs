//! Dense tensors and single-example layer primitives.
//!
//! Every layer is a pair of free functions: a forward that returns its
//! output (plus whatever it must remember), and a backward that takes the
//! forward's inputs and the upstream gradient, returns the input gradient
//! and *adds* into the parameter-gradient buffers it is given. Batching is
//! left to the caller.
//!
//! All primitives are generic over [`Real`]; production code runs in `f32`
//! and the gradient checker in `f64`.

mod gradcheck;
mod layers;
mod loss;

use std::fmt::Debug;

use num_traits::{Float, NumAssign};

pub use gradcheck::{grad_check, grad_check_where, relative_error, GradCheckOptions, GradCheckReport};
pub use layers::{
    conv1d, conv1d_backward, dense, dense_backward, global_avg_pool, global_avg_pool_backward, maxpool1d,
    maxpool1d_backward, relu, relu_backward, Pooled,
};
pub use loss::{softmax, softmax_xent};

pub trait Real: Float + NumAssign + Default + Debug + Send + Sync + 'static {
    fn of(v: f64) -> Self {
        Self::from(v).expect("f64 fits every Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("max-pool input length {0} is odd")]
    OddLength(usize),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

pub(crate) fn mismatch(what: impl Into<String>) -> NnError {
    NnError::ShapeMismatch(what.into())
}

/// Row-major dense array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "zero-sized dimension in {shape:?}");
        Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self, NnError> {
        if shape.iter().any(|&d| d == 0) || shape.iter().product::<usize>() != data.len() {
            return Err(mismatch(format!("{} values for shape {shape:?}", data.len())));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Row `i` of the leading dimension.
    pub fn row(&self, i: usize) -> &[T] {
        let n = self.data.len() / self.shape[0];
        &self.data[i * n..(i + 1) * n]
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, other: &Tensor<T>, alpha: T) {
        assert_eq!(self.shape, other.shape);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::from(v).unwrap()).collect(),
        }
    }

    pub fn check_finite(&self, what: &str) -> Result<(), NnError> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(NnError::NonFinite(what.to_string()))
        }
    }

    pub(crate) fn expect_shape(&self, shape: &[usize], what: &str) -> Result<(), NnError> {
        if self.shape == shape {
            Ok(())
        } else {
            Err(mismatch(format!("{what}: expected {shape:?}, got {:?}", self.shape)))
        }
    }
}

/// A trainable tensor with its gradient and Adam moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub m: Tensor<T>,
    pub v: Tensor<T>,
}

impl<T: Real> Param<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let z = Tensor::zeros(value.shape());
        Self {
            grad: z.clone(),
            m: z.clone(),
            v: z,
            value,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }

    pub fn cast<U: Real>(&self) -> Param<U> {
        Param {
            value: self.value.cast(),
            grad: self.grad.cast(),
            m: self.m.cast(),
            v: self.v.cast(),
        }
    }
}
