//! Single-layer LSTM with a tanh embedding layer and a dense output head.
//!
//! Batches are processed "packed": sequences are sorted by decreasing length
//! and stored time-major, so the active sequences at step `t` always form a
//! prefix of the rows at that step. Every recurrent product is then one GEMM
//! over the active prefix, and backpropagation through time runs untruncated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{add_row_bias, gemm, gemm_nt, gemm_tn, sigmoid, softmax, sum_rows};
use super::{output_loss, uniform_init, Example, Loss, Network, Target, Tensor, FORGET_BIAS, INIT_SCALE};
use crate::error::{Error, Result};

/// Sequences per packed chunk; bounds activation memory.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputKind {
    SoftmaxClasses,
    LinearRegression,
}

/// How the recurrent states feed the embedding layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Readout {
    /// Hidden state at the last frame.
    #[default]
    FinalState,
    /// Mean of the hidden states over all frames.
    MeanPool,
    /// Embedding and output at every frame (sequence-to-sequence regression).
    PerFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub output_dim: usize,
    pub output_kind: OutputKind,
    #[serde(default)]
    pub readout: Readout,
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if [self.input_dim, self.hidden_dim, self.embedding_dim, self.output_dim].contains(&0) {
            return Err(Error::DimMismatch("all LSTM dimensions must be >= 1".into()));
        }
        if self.readout == Readout::PerFrame && self.output_kind == OutputKind::SoftmaxClasses {
            return Err(Error::DimMismatch("per-frame readout supports regression outputs only".into()));
        }
        Ok(())
    }

    fn shapes(&self) -> [Vec<usize>; 7] {
        let (d, h, e, o) = (self.input_dim, self.hidden_dim, self.embedding_dim, self.output_dim);
        [vec![4 * h, d], vec![4 * h, h], vec![4 * h], vec![e, h], vec![e], vec![o, e], vec![o]]
    }
}

const NAMES: [&str; 7] = ["lstm.w_input", "lstm.w_hidden", "lstm.bias", "embed.weight", "embed.bias", "out.weight", "out.bias"];
const W_X: usize = 0;
const W_H: usize = 1;
const B: usize = 2;
const W_E: usize = 3;
const B_E: usize = 4;
const W_O: usize = 5;
const B_O: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    cfg: LstmConfig,
    tensors: Vec<Tensor>,
}

/// Result of running one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmOutput {
    /// `T × hidden_dim`.
    pub hidden: Vec<f64>,
    /// `embedding_dim`, or `T × embedding_dim` for per-frame readout.
    pub embedding: Vec<f64>,
    /// Probabilities or regression values; `T × output_dim` for per-frame readout.
    pub output: Vec<f64>,
}

struct Layout {
    /// Batch positions sorted by decreasing length.
    order: Vec<usize>,
    lens: Vec<usize>,
    active: Vec<usize>,
    offs: Vec<usize>,
    rows: usize,
}

impl Layout {
    fn new(lens_in: &[usize]) -> Self {
        let mut order: Vec<usize> = (0..lens_in.len()).collect();
        order.sort_by(|&a, &b| lens_in[b].cmp(&lens_in[a]).then(a.cmp(&b)));
        let lens: Vec<usize> = order.iter().map(|&i| lens_in[i]).collect();
        let t_max = lens.first().copied().unwrap_or(0);
        let active: Vec<usize> = (0..t_max).map(|t| lens.iter().take_while(|&&l| l > t).count()).collect();
        let mut offs = Vec::with_capacity(t_max);
        let mut acc = 0;
        for &n in &active {
            offs.push(acc);
            acc += n;
        }
        Self { order, lens, active, offs, rows: acc }
    }

    fn row(&self, t: usize, k: usize) -> usize {
        self.offs[t] + k
    }
}

struct Cache {
    layout: Layout,
    x: Vec<f64>,
    act: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    readin: Vec<f64>,
    z: Vec<f64>,
    out: Vec<f64>,
    out_rows: usize,
}

impl Lstm {
    /// Uniform(-0.05, 0.05) weights, zero biases, forget-gate bias 1.
    pub fn new(cfg: LstmConfig, seed: u64) -> Result<Self> {
        Self::with_init_scale(cfg, seed, INIT_SCALE)
    }

    pub fn with_init_scale(cfg: LstmConfig, seed: u64, scale: f64) -> Result<Self> {
        let mut net = Self::zeros(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in [W_X, W_H, W_E, W_O] {
            uniform_init(&mut net.tensors[i], &mut rng, scale);
        }
        let h = net.cfg.hidden_dim;
        net.tensors[B].data_mut()[h..2 * h].fill(FORGET_BIAS);
        Ok(net)
    }

    pub fn zeros(cfg: LstmConfig) -> Result<Self> {
        cfg.validate()?;
        let tensors = cfg.shapes().iter().map(|s| Tensor::zeros(s)).collect();
        Ok(Self { cfg, tensors })
    }

    pub fn from_tensors(cfg: LstmConfig, tensors: Vec<Tensor>) -> Result<Self> {
        cfg.validate()?;
        let shapes = cfg.shapes();
        if tensors.len() != shapes.len() || tensors.iter().zip(&shapes).any(|(t, s)| t.shape() != &s[..]) {
            return Err(Error::ShapeMismatch("tensor shapes do not match LSTM config".into()));
        }
        Ok(Self { cfg, tensors })
    }

    pub fn config(&self) -> &LstmConfig {
        &self.cfg
    }

    /// Runs one `frames × input_dim` sequence from a zero initial state.
    pub fn forward(&self, seq: &[f64], frames: usize) -> Result<LstmOutput> {
        let cache = self.forward_packed(&[(seq, frames)])?;
        let h = self.cfg.hidden_dim;
        Ok(LstmOutput { hidden: cache.h[..frames * h].to_vec(), embedding: cache.z, output: cache.out })
    }

    /// Batched inference; returns `(embedding, output)` per sequence in input order.
    pub fn infer(&self, seqs: &[(&[f64], usize)]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let mut idx: Vec<usize> = (0..seqs.len()).collect();
        idx.sort_by(|&a, &b| seqs[b].1.cmp(&seqs[a].1).then(a.cmp(&b)));
        let mut results = vec![(Vec::new(), Vec::new()); seqs.len()];
        let (e, o) = (self.cfg.embedding_dim, self.cfg.output_dim);
        for chunk in idx.chunks(CHUNK) {
            let batch: Vec<(&[f64], usize)> = chunk.iter().map(|&i| seqs[i]).collect();
            let cache = self.forward_packed(&batch)?;
            let lay = &cache.layout;
            for (k, &pos) in lay.order.iter().enumerate() {
                let target = chunk[pos];
                if self.cfg.readout == Readout::PerFrame {
                    let len = lay.lens[k];
                    let mut emb = Vec::with_capacity(len * e);
                    let mut out = Vec::with_capacity(len * o);
                    for t in 0..len {
                        let r = lay.row(t, k);
                        emb.extend_from_slice(&cache.z[r * e..(r + 1) * e]);
                        out.extend_from_slice(&cache.out[r * o..(r + 1) * o]);
                    }
                    results[target] = (emb, out);
                } else {
                    results[target] = (cache.z[k * e..(k + 1) * e].to_vec(), cache.out[k * o..(k + 1) * o].to_vec());
                }
            }
        }
        Ok(results)
    }

    fn check_input(&self, seq: &[f64], frames: usize) -> Result<()> {
        if frames == 0 {
            return Err(Error::EmptySequence);
        }
        if seq.len() != frames * self.cfg.input_dim {
            return Err(Error::DimMismatch(format!(
                "{} values for {frames} frames of width {}",
                seq.len(),
                self.cfg.input_dim
            )));
        }
        Ok(())
    }

    fn forward_packed(&self, seqs: &[(&[f64], usize)]) -> Result<Cache> {
        for &(s, f) in seqs {
            self.check_input(s, f)?;
        }
        let (d, h, e, o) = (self.cfg.input_dim, self.cfg.hidden_dim, self.cfg.embedding_dim, self.cfg.output_dim);
        let g = 4 * h;
        let lens: Vec<usize> = seqs.iter().map(|s| s.1).collect();
        let layout = Layout::new(&lens);
        let rows = layout.rows;

        let mut x = vec![0.0; rows * d];
        for (k, &pos) in layout.order.iter().enumerate() {
            let seq = seqs[pos].0;
            for t in 0..layout.lens[k] {
                let r = layout.row(t, k);
                x[r * d..(r + 1) * d].copy_from_slice(&seq[t * d..(t + 1) * d]);
            }
        }

        let w_h = self.tensors[W_H].data();
        let mut act = vec![0.0; rows * g];
        gemm_nt(rows, d, g, &x, self.tensors[W_X].data(), 0.0, &mut act);
        add_row_bias(rows, self.tensors[B].data(), &mut act);

        let mut c = vec![0.0; rows * h];
        let mut tanh_c = vec![0.0; rows * h];
        let mut hs = vec![0.0; rows * h];
        for t in 0..layout.active.len() {
            let (o0, n) = (layout.offs[t], layout.active[t]);
            let prev = if t > 0 { Some(layout.offs[t - 1]) } else { None };
            if let Some(p) = prev {
                gemm_nt(n, h, g, &hs[p * h..], w_h, 1.0, &mut act[o0 * g..(o0 + n) * g]);
            }
            for k in 0..n {
                let r = o0 + k;
                let a = &mut act[r * g..(r + 1) * g];
                for j in 0..h {
                    let i_g = sigmoid(a[j]);
                    let f_g = sigmoid(a[h + j]);
                    let c_g = a[2 * h + j].tanh();
                    let o_g = sigmoid(a[3 * h + j]);
                    a[j] = i_g;
                    a[h + j] = f_g;
                    a[2 * h + j] = c_g;
                    a[3 * h + j] = o_g;
                    let c_prev = prev.map_or(0.0, |p| c[(p + k) * h + j]);
                    let cv = f_g * c_prev + i_g * c_g;
                    let tc = cv.tanh();
                    c[r * h + j] = cv;
                    tanh_c[r * h + j] = tc;
                    hs[r * h + j] = o_g * tc;
                }
            }
        }

        let n_seq = seqs.len();
        let (readin, out_rows) = match self.cfg.readout {
            Readout::PerFrame => (hs.clone(), rows),
            Readout::FinalState => {
                let mut r_in = vec![0.0; n_seq * h];
                for k in 0..n_seq {
                    let r = layout.row(layout.lens[k] - 1, k);
                    r_in[k * h..(k + 1) * h].copy_from_slice(&hs[r * h..(r + 1) * h]);
                }
                (r_in, n_seq)
            }
            Readout::MeanPool => {
                let mut r_in = vec![0.0; n_seq * h];
                for k in 0..n_seq {
                    let len = layout.lens[k];
                    let dst = &mut r_in[k * h..(k + 1) * h];
                    for t in 0..len {
                        let r = layout.row(t, k);
                        for (v, s) in dst.iter_mut().zip(&hs[r * h..(r + 1) * h]) {
                            *v += s;
                        }
                    }
                    for v in dst.iter_mut() {
                        *v /= len as f64;
                    }
                }
                (r_in, n_seq)
            }
        };

        let mut z = vec![0.0; out_rows * e];
        gemm_nt(out_rows, h, e, &readin, self.tensors[W_E].data(), 0.0, &mut z);
        add_row_bias(out_rows, self.tensors[B_E].data(), &mut z);
        z.iter_mut().for_each(|v| *v = v.tanh());

        let mut out = vec![0.0; out_rows * o];
        gemm_nt(out_rows, e, o, &z, self.tensors[W_O].data(), 0.0, &mut out);
        add_row_bias(out_rows, self.tensors[B_O].data(), &mut out);
        if self.cfg.output_kind == OutputKind::SoftmaxClasses {
            for row in out.chunks_mut(o) {
                let p = softmax(row);
                row.copy_from_slice(&p);
            }
        }
        Ok(Cache { layout, x, act, c, tanh_c, h: hs, readin, z, out, out_rows })
    }

    /// Loss summed over the chunk (each example weighted by `scale`), gradients accumulated into `grads`.
    fn chunk_loss(&self, batch: &[&Example], loss: Loss, scale: f64, grads: Option<&mut [Tensor]>) -> Result<f64> {
        let seqs: Vec<(&[f64], usize)> = batch.iter().map(|ex| (&ex.input[..], ex.frames)).collect();
        let cache = self.forward_packed(&seqs)?;
        let lay = &cache.layout;
        let (d, h, e, o) = (self.cfg.input_dim, self.cfg.hidden_dim, self.cfg.embedding_dim, self.cfg.output_dim);
        let g = 4 * h;

        let mut total = 0.0;
        let mut dout = vec![0.0; cache.out_rows * o];
        for (k, &pos) in lay.order.iter().enumerate() {
            let ex = batch[pos];
            if self.cfg.readout == Readout::PerFrame {
                let Target::Frames(y) = &ex.target else {
                    return Err(Error::DimMismatch("per-frame model needs frame targets".into()));
                };
                let len = lay.lens[k];
                if y.len() != len * o {
                    return Err(Error::ShapeMismatch(format!("{} target values for {len}x{o}", y.len())));
                }
                for t in 0..len {
                    let r = lay.row(t, k);
                    let (l, dl) =
                        output_loss(&cache.out[r * o..(r + 1) * o], &Target::Frames(y[t * o..(t + 1) * o].to_vec()), loss, self.cfg.output_kind)?;
                    total += scale * l / len as f64;
                    for (dst, v) in dout[r * o..(r + 1) * o].iter_mut().zip(dl) {
                        *dst = scale * v / len as f64;
                    }
                }
            } else {
                if loss == Loss::Mse && self.cfg.output_kind == OutputKind::SoftmaxClasses {
                    return Err(Error::DimMismatch("MSE on softmax outputs is unsupported".into()));
                }
                let (l, dl) = output_loss(&cache.out[k * o..(k + 1) * o], &ex.target, loss, self.cfg.output_kind)?;
                total += scale * l;
                for (dst, v) in dout[k * o..(k + 1) * o].iter_mut().zip(dl) {
                    *dst = scale * v;
                }
            }
        }
        let Some(grads) = grads else { return Ok(total) };

        let rows_out = cache.out_rows;
        gemm_tn(o, rows_out, e, &dout, &cache.z, 1.0, grads[W_O].data_mut());
        sum_rows(rows_out, &dout, grads[B_O].data_mut());
        let mut dz = vec![0.0; rows_out * e];
        gemm(rows_out, o, e, &dout, self.tensors[W_O].data(), 0.0, &mut dz);
        for (dv, zv) in dz.iter_mut().zip(&cache.z) {
            *dv *= 1.0 - zv * zv;
        }
        gemm_tn(e, rows_out, h, &dz, &cache.readin, 1.0, grads[W_E].data_mut());
        sum_rows(rows_out, &dz, grads[B_E].data_mut());
        let mut dr = vec![0.0; rows_out * h];
        gemm(rows_out, e, h, &dz, self.tensors[W_E].data(), 0.0, &mut dr);

        let rows = lay.rows;
        let mut dh_out = match self.cfg.readout {
            Readout::PerFrame => dr,
            Readout::FinalState => {
                let mut dh = vec![0.0; rows * h];
                for k in 0..lay.order.len() {
                    let r = lay.row(lay.lens[k] - 1, k);
                    dh[r * h..(r + 1) * h].copy_from_slice(&dr[k * h..(k + 1) * h]);
                }
                dh
            }
            Readout::MeanPool => {
                let mut dh = vec![0.0; rows * h];
                for k in 0..lay.order.len() {
                    let len = lay.lens[k];
                    for t in 0..len {
                        let r = lay.row(t, k);
                        for (dst, v) in dh[r * h..(r + 1) * h].iter_mut().zip(&dr[k * h..(k + 1) * h]) {
                            *dst = v / len as f64;
                        }
                    }
                }
                dh
            }
        };

        let w_h = self.tensors[W_H].data();
        let n0 = lay.active.first().copied().unwrap_or(0);
        let mut da = vec![0.0; rows * g];
        let mut dh_next = vec![0.0; n0 * h];
        let mut dc_next = vec![0.0; n0 * h];
        let mut dc_new = vec![0.0; n0 * h];
        let steps = lay.active.len();
        for t in (0..steps).rev() {
            let (o0, n) = (lay.offs[t], lay.active[t]);
            let n_after = if t + 1 < steps { lay.active[t + 1] } else { 0 };
            for k in 0..n {
                let r = o0 + k;
                let a = &cache.act[r * g..(r + 1) * g];
                let da_row = &mut da[r * g..(r + 1) * g];
                let carry = k < n_after;
                for j in 0..h {
                    let (i_g, f_g, c_g, o_g) = (a[j], a[h + j], a[2 * h + j], a[3 * h + j]);
                    let tc = cache.tanh_c[r * h + j];
                    let mut dh = dh_out[r * h + j];
                    let mut dc = 0.0;
                    if carry {
                        dh += dh_next[k * h + j];
                        dc = dc_next[k * h + j];
                    }
                    dc += dh * o_g * (1.0 - tc * tc);
                    let c_prev = if t > 0 { cache.c[(lay.offs[t - 1] + k) * h + j] } else { 0.0 };
                    da_row[j] = dc * c_g * i_g * (1.0 - i_g);
                    da_row[h + j] = dc * c_prev * f_g * (1.0 - f_g);
                    da_row[2 * h + j] = dc * i_g * (1.0 - c_g * c_g);
                    da_row[3 * h + j] = dh * tc * o_g * (1.0 - o_g);
                    dc_new[k * h + j] = dc * f_g;
                }
            }
            std::mem::swap(&mut dc_next, &mut dc_new);
            if t > 0 {
                gemm(n, g, h, &da[o0 * g..(o0 + n) * g], w_h, 0.0, &mut dh_next[..n * h]);
            }
            dh_out[o0 * h..(o0 + n) * h].fill(0.0);
        }

        gemm_tn(g, rows, d, &da, &cache.x, 1.0, grads[W_X].data_mut());
        sum_rows(rows, &da, grads[B].data_mut());
        if steps > 1 {
            let mut hprev = Vec::with_capacity((rows - n0) * h);
            for t in 1..steps {
                let p = lay.offs[t - 1];
                hprev.extend_from_slice(&cache.h[p * h..(p + lay.active[t]) * h]);
            }
            gemm_tn(g, rows - n0, h, &da[n0 * g..], &hprev, 1.0, grads[W_H].data_mut());
        }
        Ok(total)
    }
}

impl Network for Lstm {
    fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    fn tensor_names(&self) -> Vec<String> {
        NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn batch_loss(&self, batch: &[&Example], loss: Loss, want_grad: bool) -> Result<(f64, Option<Vec<Tensor>>)> {
        if batch.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut idx: Vec<usize> = (0..batch.len()).collect();
        idx.sort_by(|&a, &b| batch[b].frames.cmp(&batch[a].frames).then(a.cmp(&b)));
        let scale = 1.0 / batch.len() as f64;
        let mut grads: Option<Vec<Tensor>> =
            want_grad.then(|| self.tensors.iter().map(|t| Tensor::zeros(t.shape())).collect());
        let mut total = 0.0;
        for chunk in idx.chunks(CHUNK) {
            let sub: Vec<&Example> = chunk.iter().map(|&i| batch[i]).collect();
            total += self.chunk_loss(&sub, loss, scale, grads.as_deref_mut())?;
        }
        Ok((total, grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::gradcheck::check_gradients;
    use rand::Rng;

    fn cfg(d: usize, h: usize, e: usize, o: usize, kind: OutputKind, readout: Readout) -> LstmConfig {
        LstmConfig { input_dim: d, hidden_dim: h, embedding_dim: e, output_dim: o, output_kind: kind, readout }
    }

    fn random_examples(n: usize, d: usize, lens: &[usize], target: impl Fn(usize, usize) -> Target, seed: u64) -> Vec<Example> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let len = lens[i % lens.len()];
                let input = (0..len * d).map(|_| rng.random_range(-1.0..1.0)).collect();
                Example::new(input, len, target(i, len))
            })
            .collect()
    }

    #[test]
    fn zero_weights_propagate_zero() {
        let net = Lstm::zeros(cfg(3, 4, 5, 3, OutputKind::SoftmaxClasses, Readout::FinalState)).unwrap();
        let out = net.forward(&[0.3, -1.0, 2.0, 0.5, 0.5, 0.5], 2).unwrap();
        assert!(out.hidden.iter().all(|&v| v == 0.0));
        assert!(out.embedding.iter().all(|&v| v == 0.0));
        for p in &out.output {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_normalizes() {
        let net = Lstm::with_init_scale(cfg(4, 6, 3, 5, OutputKind::SoftmaxClasses, Readout::FinalState), 3, 1.0).unwrap();
        let ex = random_examples(4, 4, &[1, 7, 3, 12], |_, _| Target::Class(0), 9);
        for e in &ex {
            let out = net.forward(&e.input, e.frames).unwrap();
            assert!((out.output.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(out.output.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn one_step_matches_hand_recurrence() {
        // 1-d input, 1-d hidden, scalar weights
        let c = cfg(1, 1, 1, 1, OutputKind::LinearRegression, Readout::FinalState);
        let t = |s: &[usize], v: Vec<f64>| Tensor::from_vec(s, v).unwrap();
        let (wx, wh, b) = ([0.5, -0.3, 0.8, 0.2], [0.1, 0.4, -0.6, 0.7], [0.05, 1.0, -0.1, 0.2]);
        let net = Lstm::from_tensors(
            c,
            vec![
                t(&[4, 1], wx.to_vec()),
                t(&[4, 1], wh.to_vec()),
                t(&[4], b.to_vec()),
                t(&[1, 1], vec![1.5]),
                t(&[1], vec![-0.2]),
                t(&[1, 1], vec![2.0]),
                t(&[1], vec![0.3]),
            ],
        )
        .unwrap();
        let x = 0.9;
        let s = |v: f64| 1.0 / (1.0 + (-v).exp());
        let i = s(wx[0] * x + b[0]);
        let f = s(wx[1] * x + b[1]);
        let g = (wx[2] * x + b[2]).tanh();
        let o = s(wx[3] * x + b[3]);
        let cell = f * 0.0 + i * g;
        let h = o * cell.tanh();
        let emb = (1.5 * h - 0.2).tanh();
        let y = 2.0 * emb + 0.3;
        let out = net.forward(&[x], 1).unwrap();
        assert!((out.hidden[0] - h).abs() < 1e-12);
        assert!((out.embedding[0] - emb).abs() < 1e-12);
        assert!((out.output[0] - y).abs() < 1e-12);

        // second step uses the recurrent weights
        let x2 = -0.4;
        let i2 = s(wx[0] * x2 + wh[0] * h + b[0]);
        let f2 = s(wx[1] * x2 + wh[1] * h + b[1]);
        let g2 = (wx[2] * x2 + wh[2] * h + b[2]).tanh();
        let o2 = s(wx[3] * x2 + wh[3] * h + b[3]);
        let h2 = o2 * (f2 * cell + i2 * g2).tanh();
        let out = net.forward(&[x, x2], 2).unwrap();
        assert!((out.hidden[1] - h2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let net = Lstm::zeros(cfg(3, 2, 2, 2, OutputKind::SoftmaxClasses, Readout::FinalState)).unwrap();
        assert!(matches!(net.forward(&[], 0), Err(Error::EmptySequence)));
        assert!(matches!(net.forward(&[1.0, 2.0], 1), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn batch_equals_single_sequence_sum() {
        let net = Lstm::with_init_scale(cfg(3, 5, 4, 2, OutputKind::SoftmaxClasses, Readout::FinalState), 11, 0.5).unwrap();
        let ex = random_examples(5, 3, &[4, 9, 1, 6, 9], |i, _| Target::Class(i % 2), 2);
        let refs: Vec<&Example> = ex.iter().collect();
        let (joint, _) = net.batch_loss(&refs, Loss::CrossEntropy, false).unwrap();
        let separate: f64 = ex.iter().map(|e| net.batch_loss(&[e], Loss::CrossEntropy, false).unwrap().0).sum::<f64>() / 5.0;
        assert!((joint - separate).abs() < 1e-12);
        let inferred = net.infer(&ex.iter().map(|e| (&e.input[..], e.frames)).collect::<Vec<_>>()).unwrap();
        for (e, (emb, out)) in ex.iter().zip(&inferred) {
            let single = net.forward(&e.input, e.frames).unwrap();
            assert_eq!(&single.embedding, emb);
            assert_eq!(&single.output, out);
        }
    }

    #[test]
    fn zero_loss_gives_zero_gradient() {
        let net = Lstm::with_init_scale(cfg(2, 3, 3, 2, OutputKind::LinearRegression, Readout::FinalState), 5, 0.5).unwrap();
        let mut ex = random_examples(3, 2, &[4, 2, 5], |_, _| Target::Values(vec![0.0, 0.0]), 1);
        for e in &mut ex {
            e.target = Target::Values(net.forward(&e.input, e.frames).unwrap().output);
        }
        let refs: Vec<&Example> = ex.iter().collect();
        let (l, g) = net.batch_loss(&refs, Loss::Mse, true).unwrap();
        assert!(l < 1e-24);
        assert!(g.unwrap().iter().all(|t| t.data().iter().all(|v| v.abs() < 1e-12)));
    }

    #[test]
    fn gradients_match_finite_differences() {
        for readout in [Readout::FinalState, Readout::MeanPool] {
            let net = Lstm::with_init_scale(cfg(6, 8, 4, 2, OutputKind::SoftmaxClasses, readout), 42, 0.5).unwrap();
            let ex = random_examples(3, 6, &[5], |i, _| Target::Class(i % 2), 7);
            let r = check_gradients(&net, &ex, Loss::CrossEntropy, 1e-5).unwrap();
            assert!(r.max_rel_error < 1e-4, "{readout:?}: {r:?}");
        }
        let net = Lstm::with_init_scale(cfg(5, 6, 4, 3, OutputKind::LinearRegression, Readout::PerFrame), 8, 0.5).unwrap();
        let ex = random_examples(3, 5, &[4, 6, 2], |i, len| Target::Frames((0..len * 3).map(|k| ((i + k) as f64).sin()).collect()), 3);
        let r = check_gradients(&net, &ex, Loss::Mse, 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-4, "{r:?}");
    }
}
