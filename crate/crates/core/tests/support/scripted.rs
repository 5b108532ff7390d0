//! A network whose CV error follows a script, for driving the trainer.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::VecDeque;
use std::rc::Rc;

use xprs_core::neural::{train, Example, Loss, Network, Target, Tensor, TrainConfig, TrainOutcome};
use xprs_core::Result;

/// Replays a scripted CV error per evaluation; updates do nothing.
#[derive(Clone)]
pub struct Scripted {
    p: Vec<Tensor>,
    cv: Rc<RefCell<VecDeque<f64>>>,
}

impl Network for Scripted {
    fn tensors(&self) -> &[Tensor] {
        &self.p
    }
    fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.p
    }
    fn tensor_names(&self) -> Vec<String> {
        vec!["p".into()]
    }
    fn batch_loss(&self, batch: &[&Example], _: Loss, want_grad: bool) -> Result<(f64, Option<Vec<Tensor>>)> {
        if want_grad {
            return Ok((0.0, Some(vec![Tensor::zeros(&[1])])));
        }
        if batch[0].target == Target::Values(vec![1.0]) {
            Ok((self.cv.borrow_mut().pop_front().unwrap_or(10.0), None))
        } else {
            Ok((0.0, None))
        }
    }
}

pub fn run(script: &[f64], cfg: &TrainConfig) -> TrainOutcome<Scripted> {
    let net = Scripted { p: vec![Tensor::zeros(&[1])], cv: Rc::new(RefCell::new(script.iter().copied().collect())) };
    let tr = vec![Example::new(vec![0.0], 1, Target::Values(vec![0.0]))];
    let cv = vec![Example::new(vec![0.0], 1, Target::Values(vec![1.0]))];
    train(net, &tr, &cv, cfg).unwrap()
}


/// Runs of rises separated by fresh minima, so back-offs keep happening.
pub fn rising_script(segments: &[(usize, f64)]) -> Vec<f64> {
    let mut out = vec![5.0];
    let mut level = 5.0;
    for &(rises, drop) in segments {
        level -= drop * 0.3;
        out.push(level);
        for k in 1..=rises {
            out.push(level + k as f64);
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct BackoffSweep {
    pub runs: usize,
    pub backoffs: usize,
    /// Learning rates that are not exactly the previous one times 0.9.
    pub bad_decays: usize,
    /// Runs whose returned CV error is not the logged minimum.
    pub bad_best: usize,
    /// Runs exceeding max_epochs + max_backoffs * max_epochs epochs.
    pub overruns: usize,
}

/// Checks the back-off contract on `n` random scripts and configurations.
pub fn backoff_sweep(seed: u64, n: usize) -> BackoffSweep {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = BackoffSweep::default();
    for _ in 0..n {
        let segments: Vec<(usize, f64)> = (0..rng.random_range(1..12)).map(|_| (rng.random_range(0..8), rng.random::<f64>())).collect();
        let script = rising_script(&segments);
        let mut cfg = TrainConfig::new(Loss::Mse, 1, rng.random_range(1e-4..1.0), rng.random_range(1..80), 0);
        cfg.patience = rng.random_range(1..6);
        cfg.max_backoffs = rng.random_range(0..5);
        let o = run(&script, &cfg);
        out.runs += 1;
        out.backoffs += o.lr_history.len() - 1;
        out.bad_decays += o.lr_history.windows(2).filter(|w| w[1] != w[0] * 0.9).count();
        let min = o.log.iter().map(|e| e.cv_error).fold(f64::INFINITY, f64::min);
        out.bad_best += usize::from(o.best_cv_error != min);
        out.overruns += usize::from(o.epochs_run() > cfg.max_epochs + cfg.max_backoffs * cfg.max_epochs);
    }
    out
}
