//! Two-stage expression classifier: pretraining on all graded data, then
//! fine-tuning on the class-balanced set.

use serde::{Deserialize, Serialize};

use super::{feature_tag, fit_norm, sequences, FEATURE_TAG, INPUT_NORM};
use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureMatrix};
use crate::neural::{
    train, Loss, Lstm, LstmConfig, ModelCheckpoint, ModelKind, OutputKind, Provenance, Readout, StageRecord, Target, TrainConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpressionConfig {
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub readout: Readout,
    pub pretrain: TrainConfig,
    pub finetune: TrainConfig,
}

impl Default for ExpressionConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 128,
            embedding_dim: 128,
            readout: Readout::FinalState,
            pretrain: TrainConfig::new(Loss::CrossEntropy, 200, 1e-4, 30, 0),
            finetune: TrainConfig::new(Loss::CrossEntropy, 200, 1e-2, 30, 0),
        }
    }
}

fn labeled<'a>(items: &[(&'a FeatureMatrix, bool)]) -> Vec<(&'a FeatureMatrix, Target)> {
    items.iter().map(|&(m, y)| (m, Target::Class(y as usize))).collect()
}

/// Class 1 of the softmax output is "expressive".
pub fn train_expression(
    pretrain: &[(&FeatureMatrix, bool)],
    finetune: &[(&FeatureMatrix, bool)],
    cv: &[(&FeatureMatrix, bool)],
    cfg: &ExpressionConfig,
) -> Result<ModelCheckpoint> {
    let first = pretrain.first().or(finetune.first()).ok_or(Error::EmptyDataset)?.0;
    let norm = fit_norm(pretrain.iter().chain(finetune).map(|(m, _)| *m))?;
    let lcfg = LstmConfig {
        input_dim: first.cols(),
        hidden_dim: cfg.hidden_dim,
        embedding_dim: cfg.embedding_dim,
        output_dim: 2,
        output_kind: OutputKind::SoftmaxClasses,
        readout: cfg.readout,
    };
    let cv = sequences(&labeled(cv), &norm)?;
    let mut net = Lstm::new(lcfg, cfg.pretrain.seed)?;
    let mut stages = Vec::new();
    for (name, set, tc) in [("pretrain", pretrain, &cfg.pretrain), ("finetune", finetune, &cfg.finetune)] {
        if set.is_empty() {
            continue;
        }
        let ex = sequences(&labeled(set), &norm)?;
        let out = train(net, &ex, &cv, tc)?;
        stages.push(StageRecord::from_outcome(name, tc, &out));
        net = out.model;
    }
    let prov = Provenance { seed: cfg.pretrain.seed, stages, run_config: serde_json::Value::Null };
    let mut ck = ModelCheckpoint::from_lstm(ModelKind::Expression, &net, prov);
    ck.set_extra(INPUT_NORM, &norm)?;
    ck.set_extra(FEATURE_TAG, feature_tag(first))?;
    Ok(ck)
}

/// Probability of the expressive class per query.
pub fn score_expression(ck: &ModelCheckpoint, feats: &[&FeatureMatrix]) -> Result<Vec<f64>> {
    ck.expect_kind(ModelKind::Expression)?;
    let net = ck.lstm()?;
    let norm: ColumnStats = ck.extra(INPUT_NORM)?;
    let normed: Vec<FeatureMatrix> = feats.iter().map(|m| norm.apply(m)).collect::<Result<_>>()?;
    let inputs: Vec<(&[f64], usize)> = normed.iter().map(|m| (m.data(), m.rows())).collect();
    Ok(net.infer(&inputs)?.into_iter().map(|(_, p)| p[1]).collect())
}
