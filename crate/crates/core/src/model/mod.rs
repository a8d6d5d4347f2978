//! The six-layer residual CNN, its optimizer, training loop and checkpoint
//! format.
//!
//! Layer table for `in_channels = C`, `window_len = W`:
//!
//! | layer | op                                   | output        |
//! |-------|--------------------------------------|---------------|
//! | L1    | conv C→16, K=7, ReLU, pool2          | 16 × W/2      |
//! | L2,L3 | residual: ReLU(x + conv(ReLU(conv(x)))), K=5, pool2 | 16 × W/4 |
//! | L4    | conv 16→32, K=3, ReLU, pool2         | 32 × W/8      |
//! |       | global average pool                  | 32            |
//! | L5    | dense 32→64, ReLU                    | 64            |
//! | L6    | dense 64→5 (softmax in the loss)     | 5             |

mod adam;
mod checkpoint;
mod network;
mod train;

use serde::{Deserialize, Serialize};

use crate::nn::NnError;

pub use adam::{adam_step, AdamHyper};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, read_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use network::{predict, window_tensor, ActivationPattern, BatchResult, ForwardCache, Gradients, Network, Prediction, OUTPUT_INIT_SCALE};
pub use train::{evaluate_loss, train, EpochStats, TrainOutcome, Trainer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("forward cache does not belong to the current parameters")]
    StaleCache,
    #[error("training bucket is empty")]
    EmptyTrainSet,
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint version {found}, expected {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("checkpoint was written for {found}, requested {expected}")]
    ConfigMismatch { found: String, expected: String },
    #[error("corrupt checkpoint payload: {0}")]
    CorruptPayload(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub in_channels: usize,
    pub window_len: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            in_channels: 2,
            window_len: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv { c_in: usize, c_out: usize, k: usize },
    Dense { d_in: usize, d_out: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: &'static str,
    pub kind: LayerKind,
}

impl LayerSpec {
    pub fn weight_shape(&self) -> Vec<usize> {
        match self.kind {
            LayerKind::Conv { c_in, c_out, k } => vec![c_out, c_in, k],
            LayerKind::Dense { d_in, d_out } => vec![d_out, d_in],
        }
    }

    pub fn bias_len(&self) -> usize {
        match self.kind {
            LayerKind::Conv { c_out, .. } => c_out,
            LayerKind::Dense { d_out, .. } => d_out,
        }
    }

    pub fn fan_in(&self) -> usize {
        match self.kind {
            LayerKind::Conv { c_in, k, .. } => c_in * k,
            LayerKind::Dense { d_in, .. } => d_in,
        }
    }
}

pub const N_CLASSES: usize = 5;

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.in_channels == 0 || self.in_channels > u16::MAX as usize {
            return Err(ModelError::InvalidConfig(format!("in_channels = {}", self.in_channels)));
        }
        if self.window_len == 0 || self.window_len % 8 != 0 || self.window_len > u32::MAX as usize {
            return Err(ModelError::InvalidConfig(format!(
                "window_len = {} must be a positive multiple of 8",
                self.window_len
            )));
        }
        Ok(())
    }

    pub fn layers(&self) -> [LayerSpec; 6] {
        use LayerKind::*;
        [
            LayerSpec { name: "l1", kind: Conv { c_in: self.in_channels, c_out: 16, k: 7 } },
            LayerSpec { name: "l2", kind: Conv { c_in: 16, c_out: 16, k: 5 } },
            LayerSpec { name: "l3", kind: Conv { c_in: 16, c_out: 16, k: 5 } },
            LayerSpec { name: "l4", kind: Conv { c_in: 16, c_out: 32, k: 3 } },
            LayerSpec { name: "l5", kind: Dense { d_in: 32, d_out: 64 } },
            LayerSpec { name: "l6", kind: Dense { d_in: 64, d_out: N_CLASSES } },
        ]
    }

    /// `(name, shape)` for every parameter tensor, weight then bias per layer.
    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        self.layers()
            .iter()
            .flat_map(|l| {
                [
                    (format!("{}.weight", l.name), l.weight_shape()),
                    (format!("{}.bias", l.name), vec![l.bias_len()]),
                ]
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|(_, s)| s.iter().product::<usize>()).sum()
    }
}
