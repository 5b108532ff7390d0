//! Dense feed-forward classifier/regressor with tanh hidden layers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{add_row_bias, gemm, gemm_nt, gemm_tn, softmax, sum_rows};
use super::{output_loss, uniform_init, Example, Loss, Network, OutputKind, Tensor, INIT_SCALE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub output_kind: OutputKind,
}

impl FfnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::DimMismatch("all FFN dimensions must be >= 1".into()));
        }
        Ok(())
    }

    fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.hidden);
        w.push(self.output_dim);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ffn {
    cfg: FfnConfig,
    /// weight (out × in), bias (out) per layer
    tensors: Vec<Tensor>,
}

impl Ffn {
    pub fn new(cfg: FfnConfig, seed: u64) -> Result<Self> {
        Self::with_init_scale(cfg, seed, INIT_SCALE)
    }

    pub fn with_init_scale(cfg: FfnConfig, seed: u64, scale: f64) -> Result<Self> {
        let mut net = Self::zeros(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in net.tensors.iter_mut().step_by(2) {
            uniform_init(w, &mut rng, scale);
        }
        Ok(net)
    }

    pub fn zeros(cfg: FfnConfig) -> Result<Self> {
        cfg.validate()?;
        let w = cfg.widths();
        let tensors = w.windows(2).flat_map(|p| [Tensor::zeros(&[p[1], p[0]]), Tensor::zeros(&[p[1]])]).collect();
        Ok(Self { cfg, tensors })
    }

    pub fn from_tensors(cfg: FfnConfig, tensors: Vec<Tensor>) -> Result<Self> {
        let want = Self::zeros(cfg.clone())?;
        if tensors.len() != want.tensors.len() || tensors.iter().zip(&want.tensors).any(|(a, b)| a.shape() != b.shape()) {
            return Err(Error::ShapeMismatch("tensor shapes do not match FFN config".into()));
        }
        Ok(Self { cfg, tensors })
    }

    pub fn config(&self) -> &FfnConfig {
        &self.cfg
    }

    /// Output for one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_rows(x, 1)?.pop().unwrap_or_default())
    }

    /// Outputs for `n` stacked input rows.
    pub fn infer(&self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let d = self.cfg.input_dim;
        let mut x = Vec::with_capacity(inputs.len() * d);
        for row in inputs {
            if row.len() != d {
                return Err(Error::DimMismatch(format!("input width {} vs {d}", row.len())));
            }
            x.extend_from_slice(row);
        }
        let acts = self.activations(&x, inputs.len());
        let o = self.cfg.output_dim;
        Ok(acts.last().map(|a| a.chunks(o).map(<[f64]>::to_vec).collect()).unwrap_or_default())
    }

    fn forward_rows(&self, x: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
        if x.len() != n * self.cfg.input_dim {
            return Err(Error::DimMismatch(format!("input width {} vs {}", x.len() / n.max(1), self.cfg.input_dim)));
        }
        let o = self.cfg.output_dim;
        let acts = self.activations(x, n);
        Ok(acts.last().map(|a| a.chunks(o).map(<[f64]>::to_vec).collect()).unwrap_or_default())
    }

    /// Post-activation values of every layer, input first.
    fn activations(&self, x: &[f64], n: usize) -> Vec<Vec<f64>> {
        let w = self.cfg.widths();
        let layers = w.len() - 1;
        let mut acts = vec![x.to_vec()];
        for l in 0..layers {
            let (din, dout) = (w[l], w[l + 1]);
            let mut z = vec![0.0; n * dout];
            gemm_nt(n, din, dout, &acts[l], self.tensors[2 * l].data(), 0.0, &mut z);
            add_row_bias(n, self.tensors[2 * l + 1].data(), &mut z);
            if l + 1 < layers {
                z.iter_mut().for_each(|v| *v = v.tanh());
            } else if self.cfg.output_kind == OutputKind::SoftmaxClasses {
                for row in z.chunks_mut(dout) {
                    let p = softmax(row);
                    row.copy_from_slice(&p);
                }
            }
            acts.push(z);
        }
        acts
    }
}

impl Network for Ffn {
    fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    fn tensor_names(&self) -> Vec<String> {
        (0..self.tensors.len() / 2).flat_map(|l| [format!("dense{l}.weight"), format!("dense{l}.bias")]).collect()
    }

    fn batch_loss(&self, batch: &[&Example], loss: Loss, want_grad: bool) -> Result<(f64, Option<Vec<Tensor>>)> {
        if batch.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if loss == Loss::Mse && self.cfg.output_kind == OutputKind::SoftmaxClasses {
            return Err(Error::DimMismatch("MSE on softmax outputs is unsupported".into()));
        }
        let n = batch.len();
        let d = self.cfg.input_dim;
        let mut x = Vec::with_capacity(n * d);
        for ex in batch {
            if ex.frames != 1 || ex.input.len() != d {
                return Err(Error::DimMismatch(format!("FFN expects one {d}-wide frame per example")));
            }
            x.extend_from_slice(&ex.input);
        }
        let acts = self.activations(&x, n);
        let w = self.cfg.widths();
        let o = self.cfg.output_dim;
        let out = acts.last().expect("output layer");
        let scale = 1.0 / n as f64;
        let mut total = 0.0;
        let mut delta = vec![0.0; n * o];
        for (k, ex) in batch.iter().enumerate() {
            let (l, dl) = output_loss(&out[k * o..(k + 1) * o], &ex.target, loss, self.cfg.output_kind)?;
            total += l * scale;
            for (dst, v) in delta[k * o..(k + 1) * o].iter_mut().zip(dl) {
                *dst = v * scale;
            }
        }
        if !want_grad {
            return Ok((total, None));
        }
        let mut grads: Vec<Tensor> = self.tensors.iter().map(|t| Tensor::zeros(t.shape())).collect();
        for l in (0..w.len() - 1).rev() {
            let (din, dout) = (w[l], w[l + 1]);
            gemm_tn(dout, n, din, &delta, &acts[l], 0.0, grads[2 * l].data_mut());
            sum_rows(n, &delta, grads[2 * l + 1].data_mut());
            if l > 0 {
                let mut prev = vec![0.0; n * din];
                gemm(n, dout, din, &delta, self.tensors[2 * l].data(), 0.0, &mut prev);
                for (p, a) in prev.iter_mut().zip(&acts[l]) {
                    *p *= 1.0 - a * a;
                }
                delta = prev;
            }
        }
        Ok((total, Some(grads)))
    }
}
