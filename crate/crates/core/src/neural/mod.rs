//! A small sequence-learning engine: single-layer LSTM and feed-forward
//! networks with analytic gradients, Adam, and a back-off early-stopping
//! trainer.

mod adam;
mod checkpoint;
mod ffn;
pub mod gradcheck;
pub(crate) mod linalg;
mod lstm;
mod tensor;
mod trainer;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use checkpoint::{Architecture, ModelCheckpoint, ModelKind, Provenance, StageRecord};
pub use ffn::{Ffn, FfnConfig};
pub use lstm::{Lstm, LstmConfig, LstmOutput, OutputKind, Readout};
pub use tensor::Tensor;
pub use trainer::{mean_loss, train, EpochLog, StopReason, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};

/// Half-width of the uniform weight initialization.
pub const INIT_SCALE: f64 = 0.05;
/// Initial LSTM forget-gate bias.
pub const FORGET_BIAS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    CrossEntropy,
    Mse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Class index for softmax outputs.
    Class(usize),
    /// One regression vector per sequence.
    Values(Vec<f64>),
    /// `frames × output_dim` regression targets, row-major.
    Frames(Vec<f64>),
}

/// One training sequence: `frames × dim` row-major input and its target.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub frames: usize,
    pub target: Target,
}

impl Example {
    pub fn new(input: Vec<f64>, frames: usize, target: Target) -> Self {
        Self { input, frames, target }
    }

    pub fn dim(&self) -> usize {
        if self.frames == 0 {
            0
        } else {
            self.input.len() / self.frames
        }
    }
}

/// A differentiable model with a flat list of parameter tensors.
pub trait Network: Clone {
    fn tensors(&self) -> &[Tensor];
    fn tensors_mut(&mut self) -> &mut [Tensor];
    fn tensor_names(&self) -> Vec<String>;

    /// Mean loss over `batch`, with gradients for every tensor when `want_grad`.
    fn batch_loss(&self, batch: &[&Example], loss: Loss, want_grad: bool) -> Result<(f64, Option<Vec<Tensor>>)>;

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(Tensor::len).sum()
    }
}

pub(crate) fn uniform_init(t: &mut Tensor, rng: &mut ChaCha8Rng, scale: f64) {
    for v in t.data_mut() {
        *v = rng.random_range(-scale..scale);
    }
}

/// Per-example loss and output gradient (before batch averaging).
pub(crate) fn output_loss(out: &[f64], target: &Target, loss: Loss, kind: OutputKind) -> Result<(f64, Vec<f64>)> {
    match (loss, target) {
        (Loss::CrossEntropy, Target::Class(c)) => {
            if kind != OutputKind::SoftmaxClasses || *c >= out.len() {
                return Err(Error::DimMismatch(format!("class {c} for {} softmax outputs", out.len())));
            }
            // `out` already holds probabilities
            let mut d = out.to_vec();
            d[*c] -= 1.0;
            Ok((-out[*c].max(f64::MIN_POSITIVE).ln(), d))
        }
        (Loss::Mse, Target::Values(y)) | (Loss::Mse, Target::Frames(y)) => {
            if y.len() != out.len() {
                return Err(Error::DimMismatch(format!("target width {} vs output {}", y.len(), out.len())));
            }
            let n = out.len() as f64;
            let l = out.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / n;
            // only valid for linear outputs; softmax+MSE is rejected by the models
            Ok((l, out.iter().zip(y).map(|(o, t)| 2.0 * (o - t) / n).collect()))
        }
        _ => Err(Error::DimMismatch(format!("loss {loss:?} incompatible with target"))),
    }
}
