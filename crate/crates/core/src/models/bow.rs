//! Bag-of-words transcript baseline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{
    train, Example, Ffn, FfnConfig, Loss, ModelCheckpoint, ModelKind, OutputKind, Provenance, StageRecord, Target, TrainConfig,
};

const VOCAB: &str = "vocabulary";

/// Lowercases, drops punctuation, splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect::<String>()
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

/// Sorted word list; position is the feature index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowVocabulary {
    words: Vec<String>,
}

impl BowVocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Token counts over the vocabulary; unknown words are ignored.
    pub fn vectorize(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.words.len()];
        for tok in tokenize(text) {
            if let Ok(i) = self.words.binary_search(&tok) {
                v[i] += 1.0;
            }
        }
        v
    }
}

/// Keeps words seen at least `min_count` times.
pub fn bow_fit<'a>(texts: impl IntoIterator<Item = &'a str>, min_count: usize) -> Result<BowVocabulary> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in texts {
        for tok in tokenize(t) {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let words: Vec<String> = counts.into_iter().filter(|&(_, c)| c >= min_count).map(|(w, _)| w).collect();
    if words.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(BowVocabulary { words })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BowConfig {
    pub min_count: usize,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for BowConfig {
    fn default() -> Self {
        Self { min_count: 2, hidden: vec![128, 128], train: TrainConfig::new(Loss::CrossEntropy, 200, 1e-3, 40, 0) }
    }
}

fn examples(vocab: &BowVocabulary, items: &[(&str, bool)]) -> Vec<Example> {
    items.iter().map(|&(t, y)| Example::new(vocab.vectorize(t), 1, Target::Class(y as usize))).collect()
}

/// The vocabulary comes from `vocab_texts`; the classifier is trained on `train_set`.
pub fn train_bow_baseline(
    vocab_texts: &[&str],
    train_set: &[(&str, bool)],
    cv: &[(&str, bool)],
    cfg: &BowConfig,
) -> Result<ModelCheckpoint> {
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let vocab = bow_fit(vocab_texts.iter().copied(), cfg.min_count)?;
    let fcfg = FfnConfig {
        input_dim: vocab.len(),
        hidden: cfg.hidden.clone(),
        output_dim: 2,
        output_kind: OutputKind::SoftmaxClasses,
    };
    let out = train(Ffn::new(fcfg, cfg.train.seed)?, &examples(&vocab, train_set), &examples(&vocab, cv), &cfg.train)?;
    let prov = Provenance {
        seed: cfg.train.seed,
        stages: vec![StageRecord::from_outcome("bow", &cfg.train, &out)],
        run_config: serde_json::Value::Null,
    };
    let mut ck = ModelCheckpoint::from_ffn(ModelKind::BowBaseline, &out.model, prov);
    ck.set_extra(VOCAB, &vocab)?;
    Ok(ck)
}

/// Expressive-class probability per transcript.
pub fn score_bow(ck: &ModelCheckpoint, texts: &[&str]) -> Result<Vec<f64>> {
    ck.expect_kind(ModelKind::BowBaseline)?;
    let vocab: BowVocabulary = ck.extra(VOCAB)?;
    let rows: Vec<Vec<f64>> = texts.iter().map(|t| vocab.vectorize(t)).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(ck.ffn()?.infer(&refs)?.into_iter().map(|p| p[1]).collect())
}
