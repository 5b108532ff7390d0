//! Feed-forward fusion of per-query embeddings from several detectors.

use serde::{Deserialize, Serialize};

use super::{EmbeddingSource, INPUT_NORM};
use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureKind, FeatureMatrix, Meta};
use crate::neural::{
    train, Example, Ffn, FfnConfig, Loss, ModelCheckpoint, ModelKind, OutputKind, Provenance, StageRecord, Target, TrainConfig,
};

const SOURCES: &str = "sources";

/// One embedding stream: `matrix` row `i` belongs to query `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub name: String,
    pub ids: Vec<String>,
    pub matrix: FeatureMatrix,
}

impl EmbeddingSet {
    pub fn new(name: impl Into<String>, ids: Vec<String>, matrix: FeatureMatrix) -> Result<Self> {
        if ids.len() != matrix.rows() {
            return Err(Error::LengthMismatch(ids.len(), matrix.rows()));
        }
        Ok(Self { name: name.into(), ids, matrix })
    }

    fn is_emotion(&self) -> bool {
        self.matrix
            .meta
            .get("source")
            .and_then(|v| serde_json::from_value::<EmbeddingSource>(v.clone()).ok())
            .is_some_and(|s| matches!(s, EmbeddingSource::Emotion(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SourceSpec {
    name: String,
    width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Hidden width; when unset, 128 if an emotion stream is present, else 256.
    pub hidden_dim: Option<usize>,
    pub train: TrainConfig,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { hidden_dim: None, train: TrainConfig::new(Loss::CrossEntropy, 200, 1e-3, 40, 0) }
    }
}

/// Concatenates the streams query by query; every stream must list the same ids
/// in the same order.
fn fuse(sets: &[EmbeddingSet]) -> Result<FeatureMatrix> {
    let first = sets.first().ok_or(Error::EmptyDataset)?;
    for s in &sets[1..] {
        if s.ids != first.ids {
            return Err(Error::SourceListMismatch(format!("query ids of '{}' differ from '{}'", s.name, first.name)));
        }
    }
    let width: usize = sets.iter().map(|s| s.matrix.cols()).sum();
    let mut data = Vec::with_capacity(first.ids.len() * width);
    for i in 0..first.ids.len() {
        for s in sets {
            data.extend_from_slice(s.matrix.row(i));
        }
    }
    FeatureMatrix::new(FeatureKind::Custom, first.ids.len(), width, data, Meta::new())
}

fn specs(sets: &[EmbeddingSet]) -> Vec<SourceSpec> {
    sets.iter().map(|s| SourceSpec { name: s.name.clone(), width: s.matrix.cols() }).collect()
}

fn examples(x: &FeatureMatrix, labels: &[bool]) -> Result<Vec<Example>> {
    if labels.len() != x.rows() {
        return Err(Error::LengthMismatch(labels.len(), x.rows()));
    }
    Ok((0..x.rows()).map(|i| Example::new(x.row(i).to_vec(), 1, Target::Class(labels[i] as usize))).collect())
}

/// The stream order of `train_sets` is recorded; scoring must use the same order.
pub fn train_fusion(
    train_sets: &[EmbeddingSet],
    train_labels: &[bool],
    cv_sets: &[EmbeddingSet],
    cv_labels: &[bool],
    cfg: &FusionConfig,
) -> Result<ModelCheckpoint> {
    let sources = specs(train_sets);
    if specs(cv_sets) != sources {
        return Err(Error::SourceListMismatch("cross-validation streams differ from training streams".into()));
    }
    let x = fuse(train_sets)?;
    let norm = ColumnStats::fit([&x])?;
    let tr = examples(&norm.apply(&x)?, train_labels)?;
    let cv = examples(&norm.apply(&fuse(cv_sets)?)?, cv_labels)?;
    let hidden = cfg.hidden_dim.unwrap_or(if train_sets.iter().any(EmbeddingSet::is_emotion) { 128 } else { 256 });
    let fcfg = FfnConfig { input_dim: x.cols(), hidden: vec![hidden], output_dim: 2, output_kind: OutputKind::SoftmaxClasses };
    let out = train(Ffn::new(fcfg, cfg.train.seed)?, &tr, &cv, &cfg.train)?;
    let prov = Provenance {
        seed: cfg.train.seed,
        stages: vec![StageRecord::from_outcome("fusion", &cfg.train, &out)],
        run_config: serde_json::Value::Null,
    };
    let mut ck = ModelCheckpoint::from_ffn(ModelKind::Fusion, &out.model, prov);
    ck.set_extra(INPUT_NORM, &norm)?;
    ck.set_extra(SOURCES, &sources)?;
    Ok(ck)
}

/// Expressive-class probability per query, in id order.
pub fn score_fusion(ck: &ModelCheckpoint, sets: &[EmbeddingSet]) -> Result<Vec<f64>> {
    ck.expect_kind(ModelKind::Fusion)?;
    let want: Vec<SourceSpec> = ck.extra(SOURCES)?;
    let got = specs(sets);
    if got != want {
        let names = |v: &[SourceSpec]| v.iter().map(|s| format!("{}({})", s.name, s.width)).collect::<Vec<_>>().join(",");
        return Err(Error::SourceListMismatch(format!("expected [{}], got [{}]", names(&want), names(&got))));
    }
    let norm: ColumnStats = ck.extra(INPUT_NORM)?;
    let x = norm.apply(&fuse(sets)?)?;
    let rows: Vec<&[f64]> = (0..x.rows()).map(|i| x.row(i)).collect();
    Ok(ck.ffn()?.infer(&rows)?.into_iter().map(|p| p[1]).collect())
}
