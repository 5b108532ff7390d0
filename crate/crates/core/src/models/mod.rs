//! Concrete detectors: the expression and emotion LSTMs, embedding
//! extraction, embedding fusion, and the bag-of-words text baseline.

mod bow;
mod emotion;
mod expression;
mod fusion;

use serde::{Deserialize, Serialize};

pub use bow::{bow_fit, score_bow, tokenize, train_bow_baseline, BowConfig, BowVocabulary};
pub use emotion::{predict_emotion, train_emotion, EmotionConfig};
pub use expression::{score_expression, train_expression, ExpressionConfig};
pub use fusion::{score_fusion, train_fusion, EmbeddingSet, FusionConfig};

use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureMatrix};
use crate::neural::{Example, ModelCheckpoint, ModelKind, Target};

/// Where an embedding comes from; the string names the input features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingSource {
    Acoustic(String),
    Emotion(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub values: Vec<f64>,
    pub source: EmbeddingSource,
}

const INPUT_NORM: &str = "input_norm";
const FEATURE_TAG: &str = "features";

/// Describes a feature stream by its kind or, for mixed streams, its sources.
pub fn feature_tag(m: &FeatureMatrix) -> String {
    match m.meta.get("sources").and_then(|s| s.as_array()) {
        Some(parts) => parts.iter().filter_map(|p| p.as_str()).collect::<Vec<_>>().join("+"),
        None => m.kind().to_string(),
    }
}

fn fit_norm<'a>(mats: impl IntoIterator<Item = &'a FeatureMatrix>) -> Result<ColumnStats> {
    ColumnStats::fit(mats)
}

fn sequence(m: &FeatureMatrix, norm: &ColumnStats, target: Target) -> Result<Example> {
    if m.rows() == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(Example::new(norm.apply(m)?.data().to_vec(), m.rows(), target))
}

fn sequences(items: &[(&FeatureMatrix, Target)], norm: &ColumnStats) -> Result<Vec<Example>> {
    items.iter().map(|(m, t)| sequence(m, norm, t.clone())).collect()
}

/// Embedding-layer activations of an expression or emotion model, one row per query.
pub fn extract_embeddings(ck: &ModelCheckpoint, feats: &[&FeatureMatrix]) -> Result<FeatureMatrix> {
    let source = match ck.kind {
        ModelKind::Expression => EmbeddingSource::Acoustic(ck.extra(FEATURE_TAG)?),
        ModelKind::Emotion => EmbeddingSource::Emotion(ck.extra(FEATURE_TAG)?),
        other => return Err(Error::WrongModelKind { expected: "Expression or Emotion".into(), got: format!("{other:?}") }),
    };
    let net = ck.lstm()?;
    let norm: ColumnStats = ck.extra(INPUT_NORM)?;
    let normed: Vec<FeatureMatrix> = feats.iter().map(|m| norm.apply(m)).collect::<Result<_>>()?;
    let inputs: Vec<(&[f64], usize)> = normed.iter().map(|m| (m.data(), m.rows())).collect();
    let rows: Vec<Vec<f64>> = net.infer(&inputs)?.into_iter().map(|(e, _)| e).collect();
    let mut meta = crate::features::Meta::new();
    meta.insert("source".into(), serde_json::to_value(&source)?);
    let dim = net.config().embedding_dim;
    let data = rows.concat();
    FeatureMatrix::new(crate::features::FeatureKind::Custom, feats.len(), dim, data, meta)
}

/// Embedding of a single query.
pub fn extract_embedding(ck: &ModelCheckpoint, feat: &FeatureMatrix) -> Result<Embedding> {
    let m = extract_embeddings(ck, &[feat])?;
    let source = serde_json::from_value(m.meta["source"].clone())?;
    Ok(Embedding { values: m.row(0).to_vec(), source })
}
