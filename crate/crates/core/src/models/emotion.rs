//! Joint valence/arousal regressor on the 1–7 grade scale.

use serde::{Deserialize, Serialize};

use super::{feature_tag, fit_norm, sequences, FEATURE_TAG, INPUT_NORM};
use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureMatrix};
use crate::neural::{
    train, Loss, Lstm, LstmConfig, ModelCheckpoint, ModelKind, OutputKind, Provenance, Readout, StageRecord, Target, TrainConfig,
};

const TARGET_NORM: &str = "target_norm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmotionConfig {
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub readout: Readout,
    pub train: TrainConfig,
}

impl Default for EmotionConfig {
    fn default() -> Self {
        Self { hidden_dim: 64, embedding_dim: 64, readout: Readout::FinalState, train: TrainConfig::new(Loss::Mse, 300, 0.01, 30, 0) }
    }
}

/// Per-dimension mean and spread of the (valence, arousal) targets.
fn target_stats(items: &[(&FeatureMatrix, [f64; 2])]) -> ColumnStats {
    let n = items.len() as f64;
    let mut mean = vec![0.0; 2];
    let mut std = vec![0.0; 2];
    for j in 0..2 {
        mean[j] = items.iter().map(|(_, y)| y[j]).sum::<f64>() / n;
        let var = items.iter().map(|(_, y)| (y[j] - mean[j]).powi(2)).sum::<f64>() / n;
        std[j] = if var > 1e-8 { var.sqrt() } else { 1.0 };
    }
    ColumnStats { mean, std }
}

fn targets<'a>(items: &[(&'a FeatureMatrix, [f64; 2])], ys: &ColumnStats) -> Vec<(&'a FeatureMatrix, Target)> {
    items.iter().map(|&(m, y)| (m, Target::Values((0..2).map(|j| (y[j] - ys.mean[j]) / ys.std[j]).collect()))).collect()
}

/// Targets are `[valence, arousal]`; they are standardized for training and
/// predictions are mapped back to the grade scale.
pub fn train_emotion(train_set: &[(&FeatureMatrix, [f64; 2])], cv: &[(&FeatureMatrix, [f64; 2])], cfg: &EmotionConfig) -> Result<ModelCheckpoint> {
    let first = train_set.first().ok_or(Error::EmptyDataset)?.0;
    let norm = fit_norm(train_set.iter().map(|(m, _)| *m))?;
    let ys = target_stats(train_set);
    let lcfg = LstmConfig {
        input_dim: first.cols(),
        hidden_dim: cfg.hidden_dim,
        embedding_dim: cfg.embedding_dim,
        output_dim: 2,
        output_kind: OutputKind::LinearRegression,
        readout: cfg.readout,
    };
    let tr = sequences(&targets(train_set, &ys), &norm)?;
    let cv = sequences(&targets(cv, &ys), &norm)?;
    let out = train(Lstm::new(lcfg, cfg.train.seed)?, &tr, &cv, &cfg.train)?;
    let prov = Provenance {
        seed: cfg.train.seed,
        stages: vec![StageRecord::from_outcome("emotion", &cfg.train, &out)],
        run_config: serde_json::Value::Null,
    };
    let mut ck = ModelCheckpoint::from_lstm(ModelKind::Emotion, &out.model, prov);
    ck.set_extra(INPUT_NORM, &norm)?;
    ck.set_extra(TARGET_NORM, &ys)?;
    ck.set_extra(FEATURE_TAG, feature_tag(first))?;
    Ok(ck)
}

/// `[valence, arousal]` predictions on the 1–7 scale.
pub fn predict_emotion(ck: &ModelCheckpoint, feats: &[&FeatureMatrix]) -> Result<Vec<[f64; 2]>> {
    ck.expect_kind(ModelKind::Emotion)?;
    let net = ck.lstm()?;
    let norm: ColumnStats = ck.extra(INPUT_NORM)?;
    let ys: ColumnStats = ck.extra(TARGET_NORM)?;
    let normed: Vec<FeatureMatrix> = feats.iter().map(|m| norm.apply(m)).collect::<Result<_>>()?;
    let inputs: Vec<(&[f64], usize)> = normed.iter().map(|m| (m.data(), m.rows())).collect();
    Ok(net
        .infer(&inputs)?
        .into_iter()
        .map(|(_, o)| [o[0] * ys.std[0] + ys.mean[0], o[1] * ys.std[1] + ys.mean[1]])
        .collect())
}
