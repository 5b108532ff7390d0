//! Mini-batch Adam training with early stopping by back-off: after `patience`
//! consecutive rises of the CV error the best weights are restored and the
//! learning rate is decayed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, AdamState, Example, Loss, Network};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: Loss,
    pub batch_size: usize,
    pub learning_rate: f64,
    #[serde(default = "defaults::beta1")]
    pub beta1: f64,
    #[serde(default = "defaults::beta2")]
    pub beta2: f64,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    pub max_epochs: usize,
    #[serde(default = "defaults::patience")]
    pub patience: usize,
    #[serde(default = "defaults::lr_decay")]
    pub lr_decay_on_backoff: f64,
    #[serde(default = "defaults::max_backoffs")]
    pub max_backoffs: usize,
    pub seed: u64,
}

mod defaults {
    pub fn beta1() -> f64 {
        0.9
    }
    pub fn beta2() -> f64 {
        0.999
    }
    pub fn epsilon() -> f64 {
        1e-8
    }
    pub fn patience() -> usize {
        5
    }
    pub fn lr_decay() -> f64 {
        0.9
    }
    pub fn max_backoffs() -> usize {
        3
    }
}

impl TrainConfig {
    pub fn new(loss: Loss, batch_size: usize, learning_rate: f64, max_epochs: usize, seed: u64) -> Self {
        Self {
            loss,
            batch_size,
            learning_rate,
            beta1: defaults::beta1(),
            beta2: defaults::beta2(),
            epsilon: defaults::epsilon(),
            max_epochs,
            patience: defaults::patience(),
            lr_decay_on_backoff: defaults::lr_decay(),
            max_backoffs: defaults::max_backoffs(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Format(format!("train config: {m}")));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.lr_decay_on_backoff > 0.0 && self.lr_decay_on_backoff < 1.0) {
            return bad("lr_decay_on_backoff must lie in (0, 1)");
        }
        if self.patience == 0 {
            return bad("patience must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 0 is the untrained model.
    pub epoch: usize,
    pub train_loss: f64,
    pub cv_error: f64,
    pub learning_rate: f64,
    /// Best weights were restored after this epoch.
    pub backoff: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxEpochs,
    /// Back-off re-triggered with no new best since the previous one.
    BackoffFailed,
    BackoffsExhausted,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<N> {
    /// Weights with the lowest CV error seen.
    pub model: N,
    pub best_cv_error: f64,
    pub best_epoch: usize,
    /// Learning rate at the start and after every back-off.
    pub lr_history: Vec<f64>,
    pub log: Vec<EpochLog>,
    pub stop: StopReason,
}

impl<N> TrainOutcome<N> {
    pub fn epochs_run(&self) -> usize {
        self.log.len().saturating_sub(1)
    }
}

/// Mean loss of `net` over `set`.
pub fn mean_loss<N: Network>(net: &N, set: &[Example], loss: Loss) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let refs: Vec<&Example> = set.iter().collect();
    Ok(net.batch_loss(&refs, loss, false)?.0)
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalDivergence(format!("{what} is {v}")))
    }
}

/// Trains `net` with the CV error taken as the mean loss on `cv_set`.
pub fn train<N: Network>(mut net: N, train_set: &[Example], cv_set: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome<N>> {
    cfg.validate()?;
    if train_set.is_empty() || cv_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(net.tensors(), cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut lr = cfg.learning_rate;

    let cv0 = finite(mean_loss(&net, cv_set, cfg.loss)?, "initial CV error")?;
    let train0 = finite(mean_loss(&net, train_set, cfg.loss)?, "initial training loss")?;
    let mut log = vec![EpochLog { epoch: 0, train_loss: train0, cv_error: cv0, learning_rate: lr, backoff: false }];
    let mut best = net.clone();
    let (mut best_cv, mut best_epoch, mut prev_cv) = (cv0, 0, cv0);
    let (mut streak, mut backoffs, mut improved) = (0, 0, true);
    let mut lr_history = vec![lr];
    let mut stop = StopReason::MaxEpochs;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (l, grads) = net.batch_loss(&batch, cfg.loss, true)?;
            finite(l, &format!("training loss at epoch {epoch}"))?;
            let grads = grads.ok_or(Error::EmptyDataset)?;
            adam_step(net.tensors_mut(), &grads, &mut adam, lr)?;
            sum += l * batch.len() as f64;
        }
        if let Some(i) = net.tensors().iter().position(|t| !t.all_finite()) {
            return Err(Error::NumericalDivergence(format!("tensor {} after epoch {epoch}", net.tensor_names()[i])));
        }
        let train_loss = sum / train_set.len() as f64;
        let cv = finite(mean_loss(&net, cv_set, cfg.loss)?, &format!("CV error at epoch {epoch}"))?;
        if cv < best_cv {
            best = net.clone();
            best_cv = cv;
            best_epoch = epoch;
            improved = true;
        }
        streak = if cv > prev_cv { streak + 1 } else { 0 };
        prev_cv = cv;
        log.push(EpochLog { epoch, train_loss, cv_error: cv, learning_rate: lr, backoff: false });

        if streak >= cfg.patience {
            if !improved {
                stop = StopReason::BackoffFailed;
                break;
            }
            if backoffs >= cfg.max_backoffs {
                stop = StopReason::BackoffsExhausted;
                break;
            }
            net = best.clone();
            lr *= cfg.lr_decay_on_backoff;
            adam.reset();
            backoffs += 1;
            streak = 0;
            prev_cv = best_cv;
            improved = false;
            lr_history.push(lr);
            if let Some(last) = log.last_mut() {
                last.backoff = true;
            }
        }
    }
    Ok(TrainOutcome { model: best, best_cv_error: best_cv, best_epoch, lr_history, log, stop })
}
