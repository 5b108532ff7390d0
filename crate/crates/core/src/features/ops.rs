use serde::{Deserialize, Serialize};

use super::{FeatureKind, FeatureMatrix, Meta};
use crate::error::{Error, Result};

const VARIANCE_FLOOR: f64 = 1e-8;

/// Column-wise concatenation of two streams with equal frame counts.
pub fn concat(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::FrameCountMismatch(a.rows(), b.rows()));
    }
    if b.cols() == 0 {
        return Ok(a.clone());
    }
    if a.cols() == 0 {
        return Ok(b.clone());
    }
    let cols = a.cols() + b.cols();
    let mut data = Vec::with_capacity(a.rows() * cols);
    for t in 0..a.rows() {
        data.extend_from_slice(a.row(t));
        data.extend_from_slice(b.row(t));
    }
    let kind = if a.kind().is_cepstral20() && b.kind() == FeatureKind::F0v3 {
        FeatureKind::Concat23
    } else {
        FeatureKind::Custom
    };
    let mut sources = match a.meta.get("sources") {
        Some(serde_json::Value::Array(s)) if a.kind() == FeatureKind::Custom => s.clone(),
        _ => vec![a.kind().to_string().into()],
    };
    sources.push(b.kind().to_string().into());
    let mut meta = Meta::new();
    meta.insert("sources".into(), sources.into());
    FeatureMatrix::new(kind, a.rows(), cols, data, meta)
}

/// Regression deltas over ±2 frames with edge repetition.
fn deltas(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    let at = |t: isize, j: usize| x[(t.clamp(0, rows as isize - 1) as usize) * cols + j];
    for t in 0..rows as isize {
        for j in 0..cols {
            let num = (at(t + 1, j) - at(t - 1, j)) + 2.0 * (at(t + 2, j) - at(t - 2, j));
            out[t as usize * cols + j] = num / 10.0;
        }
    }
    out
}

/// `[static, Δ, ΔΔ]` from 13 static mel cepstra.
pub fn add_deltas(f: &FeatureMatrix) -> Result<FeatureMatrix> {
    if f.kind() != FeatureKind::Mfcc13 {
        return Err(Error::WrongKind { expected: "Mfcc13".into(), got: f.kind().to_string() });
    }
    let (rows, cols) = (f.rows(), f.cols());
    let d1 = deltas(f.data(), rows, cols);
    let d2 = deltas(&d1, rows, cols);
    let mut data = Vec::with_capacity(rows * cols * 3);
    for t in 0..rows {
        data.extend_from_slice(f.row(t));
        data.extend_from_slice(&d1[t * cols..(t + 1) * cols]);
        data.extend_from_slice(&d2[t * cols..(t + 1) * cols]);
    }
    let mut meta = f.meta.clone();
    meta.insert("delta_window".into(), 2.into());
    FeatureMatrix::new(FeatureKind::Mfcc39, rows, cols * 3, data, meta)
}

/// Stacks frames `t-context ..= t+context` (edges repeated) into each row.
pub fn splice(f: &FeatureMatrix, context: usize) -> FeatureMatrix {
    let (rows, cols) = (f.rows(), f.cols());
    let width = cols * (2 * context + 1);
    let mut data = Vec::with_capacity(rows * width);
    for t in 0..rows as isize {
        for k in -(context as isize)..=context as isize {
            let src = (t + k).clamp(0, rows as isize - 1) as usize;
            data.extend_from_slice(f.row(src));
        }
    }
    let kind = if f.kind() == FeatureKind::Mfcc39 && context == 5 {
        FeatureKind::Spliced429
    } else if context == 0 {
        f.kind()
    } else {
        FeatureKind::Custom
    };
    let mut meta = f.meta.clone();
    meta.insert("splice_context".into(), context.into());
    FeatureMatrix::new(kind, rows, width, data, meta).expect("splice preserves finiteness and width")
}

/// Per-dimension mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ColumnStats {
    /// Population statistics over all rows of all matrices.
    pub fn fit<'a>(mats: impl IntoIterator<Item = &'a FeatureMatrix>) -> Result<Self> {
        let mut sum: Vec<f64> = Vec::new();
        let mut sq: Vec<f64> = Vec::new();
        let mut n = 0usize;
        let mats: Vec<&FeatureMatrix> = mats.into_iter().collect();
        for m in &mats {
            if sum.is_empty() {
                sum = vec![0.0; m.cols()];
            }
            if m.cols() != sum.len() {
                return Err(Error::DimMismatch(format!("{} vs {}", m.cols(), sum.len())));
            }
            for t in 0..m.rows() {
                for (s, v) in sum.iter_mut().zip(m.row(t)) {
                    *s += v;
                }
            }
            n += m.rows();
        }
        if n < 2 {
            return Err(Error::TooFewFrames(n));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        sq.resize(mean.len(), 0.0);
        for m in &mats {
            for t in 0..m.rows() {
                for ((q, v), mu) in sq.iter_mut().zip(m.row(t)).zip(&mean) {
                    *q += (v - mu) * (v - mu);
                }
            }
        }
        let std = sq.iter().map(|q| q / n as f64).map(|v| if v < VARIANCE_FLOOR { 1.0 } else { v.sqrt() }).collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, f: &FeatureMatrix) -> Result<FeatureMatrix> {
        if f.cols() != self.mean.len() {
            return Err(Error::DimMismatch(format!("{} vs {}", f.cols(), self.mean.len())));
        }
        let cols = f.cols();
        let data = f.data().iter().enumerate().map(|(i, v)| (v - self.mean[i % cols]) / self.std[i % cols]).collect();
        FeatureMatrix::new(f.kind(), f.rows(), cols, data, f.meta.clone())
    }
}

/// Per-utterance mean and variance normalization.
pub fn cmvn(f: &FeatureMatrix) -> Result<FeatureMatrix> {
    if f.rows() < 2 {
        return Err(Error::TooFewFrames(f.rows()));
    }
    let mut out = ColumnStats::fit([f])?.apply(f)?;
    out.meta.insert("cmvn".into(), "utterance".into());
    Ok(out)
}
