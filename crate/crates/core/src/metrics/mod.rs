//! Detection and agreement measures: ROC/EER, WA/UWA/F-score, CCC, Pearson.

mod report;

use serde::{Deserialize, Serialize};

pub use report::{roc_csv, EvalReport, Operating};

use crate::error::{Error, Result};

/// Detection scores with binary ground truth; higher means more positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch(scores.len(), labels.len()));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Format(format!("non-finite score {s}")));
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn n_pos(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn n_neg(&self) -> usize {
        self.labels.len() - self.n_pos()
    }

    fn check_classes(&self) -> Result<(usize, usize)> {
        let (p, n) = (self.n_pos(), self.n_neg());
        if p == 0 || n == 0 {
            return Err(Error::OneClassOnly);
        }
        Ok((p, n))
    }
}

/// One operating point: accept when `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Operating points at `-inf`, every distinct score (ascending) and `+inf`.
pub fn roc_curve(s: &ScoredSet) -> Result<Vec<RocPoint>> {
    let (n_pos, n_neg) = s.check_classes()?;
    let mut pairs: Vec<(f64, bool)> = s.scores.iter().copied().zip(s.labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // everything accepted at -inf; sweep upwards rejecting one score group at a time
    let (mut accepted_neg, mut rejected_pos) = (n_neg, 0);
    let point = |t: f64, an: usize, rp: usize| RocPoint { threshold: t, far: an as f64 / n_neg as f64, frr: rp as f64 / n_pos as f64 };
    let mut roc = vec![point(f64::NEG_INFINITY, accepted_neg, rejected_pos)];
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        roc.push(point(t, accepted_neg, rejected_pos));
        while i < pairs.len() && pairs[i].0 == t {
            if pairs[i].1 {
                rejected_pos += 1;
            } else {
                accepted_neg -= 1;
            }
            i += 1;
        }
    }
    roc.push(point(f64::INFINITY, accepted_neg, rejected_pos));
    Ok(roc)
}

/// Equal error rate and the threshold of the operating point nearest to it.
pub fn eer_with_threshold(s: &ScoredSet) -> Result<(f64, f64)> {
    let roc = roc_curve(s)?;
    let k = roc.iter().position(|p| p.far - p.frr <= 0.0).expect("+inf point has FAR 0, FRR 1");
    let cur = roc[k];
    let d1 = cur.far - cur.frr;
    if d1 == 0.0 || k == 0 {
        return Ok((cur.far, cur.threshold));
    }
    let prev = roc[k - 1];
    let d0 = prev.far - prev.frr;
    let a = d0 / (d0 - d1);
    let eer = prev.far + a * (cur.far - prev.far);
    let nearest = if d0.abs() < d1.abs() && prev.threshold.is_finite() || !cur.threshold.is_finite() { prev } else { cur };
    Ok((eer, nearest.threshold))
}

/// FAR = FRR crossing, linearly interpolated between adjacent ROC points.
pub fn eer(s: &ScoredSet) -> Result<f64> {
    Ok(eer_with_threshold(s)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    /// Overall accuracy.
    pub wa: f64,
    /// Mean of per-class recalls.
    pub uwa: f64,
    /// F1 of the positive class.
    pub f_score: f64,
}

pub fn wa_uwa_f(predictions: &[bool], labels: &[bool]) -> Result<ClassScores> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    if tp + fn_ == 0 || tn + fp == 0 {
        return Err(Error::OneClassOnly);
    }
    let wa = (tp + tn) as f64 / labels.len() as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    let uwa = (recall + tn as f64 / (tn + fp) as f64) / 2.0;
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let f_score = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(ClassScores { wa, uwa, f_score })
}

/// Population variances and covariance.
fn moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    (sxx / n, syy / n, sxy / n)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Concordance correlation with population moments; 0 when undefined.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooShort(x.len()));
    }
    let (vx, vy, cov) = moments(x, y);
    let dm = mean(x) - mean(y);
    let denom = vx + vy + dm * dm;
    Ok(if denom == 0.0 { 0.0 } else { 2.0 * cov / denom })
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooShort(x.len()));
    }
    let (vx, vy, cov) = moments(x, y);
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}
