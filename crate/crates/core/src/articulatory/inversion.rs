//! Frame-wise LSTM regression from spliced MFCC39 to the eight TVs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::N_TVS;
use crate::error::{Error, Result};
use crate::features::{splice, ColumnStats, FeatureKind, FeatureMatrix, Meta, INVERSION_CONTEXT};
use crate::neural::{
    train, Example, Loss, Lstm, LstmConfig, ModelCheckpoint, ModelKind, OutputKind, Provenance, Readout, StageRecord, Target,
    TrainConfig,
};

const SPLICED: usize = 429;
/// Utterances spliced and run together at inference.
const INFER_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionConfig {
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    /// Share of utterances held out for the trainer's CV error.
    pub cv_fraction: f64,
    pub train: TrainConfig,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { hidden_dim: 128, embedding_dim: 128, cv_fraction: 0.1, train: TrainConfig::new(Loss::Mse, 8, 1e-3, 40, 0) }
    }
}

fn check_pair(feat: &FeatureMatrix, tv: &FeatureMatrix) -> Result<()> {
    if feat.cols() != SPLICED || tv.cols() != N_TVS {
        return Err(Error::ShapeMismatch(format!("pair of widths {} and {}, need {SPLICED} and {N_TVS}", feat.cols(), tv.cols())));
    }
    if feat.rows() != tv.rows() {
        return Err(Error::FrameCountMismatch(feat.rows(), tv.rows()));
    }
    Ok(())
}

fn example(feat: &FeatureMatrix, tv: &FeatureMatrix, xs: &ColumnStats, ys: &ColumnStats) -> Result<Example> {
    let x = xs.apply(feat)?;
    let y = ys.apply(tv)?;
    Ok(Example::new(x.data().to_vec(), feat.rows(), Target::Frames(y.data().to_vec())))
}

/// Trains the inversion network on frame-aligned `(spliced features, TVs)` pairs.
pub fn train_inversion(pairs: &[(&FeatureMatrix, &FeatureMatrix)], cfg: &InversionConfig) -> Result<ModelCheckpoint> {
    if pairs.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    for (f, t) in pairs {
        check_pair(f, t)?;
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.train.seed));
    let n_cv = ((pairs.len() as f64 * cfg.cv_fraction).round() as usize).clamp(1, pairs.len() - 1);
    let (cv_idx, tr_idx) = order.split_at(n_cv);

    let xs = ColumnStats::fit(tr_idx.iter().map(|&i| pairs[i].0))?;
    let ys = ColumnStats::fit(tr_idx.iter().map(|&i| pairs[i].1))?;
    let build = |idx: &[usize]| idx.iter().map(|&i| example(pairs[i].0, pairs[i].1, &xs, &ys)).collect::<Result<Vec<_>>>();
    let (tr, cv) = (build(tr_idx)?, build(cv_idx)?);

    let lcfg = LstmConfig {
        input_dim: SPLICED,
        hidden_dim: cfg.hidden_dim,
        embedding_dim: cfg.embedding_dim,
        output_dim: N_TVS,
        output_kind: OutputKind::LinearRegression,
        readout: Readout::PerFrame,
    };
    let net = Lstm::new(lcfg, cfg.train.seed)?;
    let out = train(net, &tr, &cv, &cfg.train)?;
    let prov = Provenance {
        seed: cfg.train.seed,
        stages: vec![StageRecord::from_outcome("inversion", &cfg.train, &out)],
        run_config: serde_json::Value::Null,
    };
    let mut ck = ModelCheckpoint::from_lstm(ModelKind::Inversion, &out.model, prov);
    ck.set_extra("input_norm", &xs)?;
    ck.set_extra("target_norm", &ys)?;
    Ok(ck)
}

fn run(ck: &ModelCheckpoint, spliced: &[FeatureMatrix]) -> Result<Vec<FeatureMatrix>> {
    let net = ck.lstm()?;
    let xs: ColumnStats = ck.extra("input_norm")?;
    let ys: ColumnStats = ck.extra("target_norm")?;
    let normed: Vec<FeatureMatrix> = spliced.iter().map(|s| xs.apply(s)).collect::<Result<_>>()?;
    let inputs: Vec<(&[f64], usize)> = normed.iter().map(|m| (m.data(), m.rows())).collect();
    net.infer(&inputs)?
        .into_iter()
        .zip(spliced)
        .map(|((_, y), s)| {
            let data = y.iter().enumerate().map(|(i, v)| v * ys.std[i % N_TVS] + ys.mean[i % N_TVS]).collect();
            FeatureMatrix::new(FeatureKind::Tv8, s.rows(), N_TVS, data, Meta::new())
        })
        .collect()
}

fn check_input(mfcc39: &FeatureMatrix) -> Result<()> {
    if mfcc39.kind() != FeatureKind::Mfcc39 {
        return Err(Error::WrongKind { expected: "Mfcc39".into(), got: mfcc39.kind().to_string() });
    }
    if mfcc39.rows() == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(())
}

/// Splices MFCC39 (±5 frames) and runs the inversion network: `T × 8` out.
pub fn estimate_tvs(mfcc39: &FeatureMatrix, ck: &ModelCheckpoint) -> Result<FeatureMatrix> {
    Ok(estimate_tvs_batch(&[mfcc39], ck)?.pop().expect("one output per input"))
}

/// [`estimate_tvs`] over many utterances, batched for speed.
pub fn estimate_tvs_batch(mfcc39: &[&FeatureMatrix], ck: &ModelCheckpoint) -> Result<Vec<FeatureMatrix>> {
    ck.expect_kind(ModelKind::Inversion)?;
    let mut out = Vec::with_capacity(mfcc39.len());
    for chunk in mfcc39.chunks(INFER_CHUNK) {
        for m in chunk {
            check_input(m)?;
        }
        let spliced: Vec<FeatureMatrix> = chunk.iter().map(|m| splice(m, INVERSION_CONTEXT)).collect();
        out.extend(run(ck, &spliced)?);
    }
    Ok(out)
}

/// Runs the network on already spliced features (oracle data).
pub fn estimate_from_spliced(spliced: &[FeatureMatrix], ck: &ModelCheckpoint) -> Result<Vec<FeatureMatrix>> {
    ck.expect_kind(ModelKind::Inversion)?;
    run(ck, spliced)
}
