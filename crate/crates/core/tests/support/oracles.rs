//! Brute-force references shared by the metric and grading tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use xprs_core::data::{ExprCategory, Vote};

/// Brute force: count accepted negatives and rejected positives at a threshold.
pub fn rates_at(scores: &[f64], labels: &[bool], t: f64) -> (f64, f64) {
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let fa = scores.iter().zip(labels).filter(|(s, l)| !**l && **s >= t).count() as f64;
    let fr = scores.iter().zip(labels).filter(|(s, l)| **l && **s < t).count() as f64;
    (fa / n_neg, fr / n_pos)
}

pub fn oracle_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = scores.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let mut all = vec![f64::NEG_INFINITY];
    all.extend(t);
    all.push(f64::INFINITY);
    all
}

/// Walks the brute-force curve and intersects the first segment where FAR
/// stops exceeding FRR.
pub fn eer_oracle(scores: &[f64], labels: &[bool]) -> f64 {
    let pts: Vec<(f64, f64)> = oracle_thresholds(scores).into_iter().map(|t| rates_at(scores, labels, t)).collect();
    for i in 0..pts.len() {
        let (far, frr) = pts[i];
        if far <= frr {
            if far == frr || i == 0 {
                return far;
            }
            let (pf, pr) = pts[i - 1];
            // FAR and FRR both linear in the segment parameter a
            let a = (pf - pr) / ((pf - pr) - (far - frr));
            return pf + a * (far - pf);
        }
    }
    unreachable!()
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..150);
    let levels = rng.random_range(2..40);
    loop {
        let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            let scores = labels
                .iter()
                .map(|&l| {
                    let base = rng.random_range(0..levels) as f64 / levels as f64;
                    if l { base + 0.2 } else { base }
                })
                .collect();
            return (scores, labels);
        }
    }
}

const VOTES: [Vote; 3] = [Vote::Yes, Vote::NotSure, Vote::No];

pub fn all_expression_patterns() -> Vec<[Vote; 4]> {
    let mut out = Vec::new();
    for a in VOTES {
        for b in VOTES {
            for c in VOTES {
                for d in VOTES {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Each grading rule checked literally, then resolved by precedence.
pub fn category_oracle(v: &[Vote; 4]) -> ExprCategory {
    let n = |x: Vote| v.iter().filter(|&&y| y == x).count();
    let yes_rule = n(Vote::Yes) >= 2;
    let no_rule = n(Vote::No) >= 2;
    let mild_yes_rule = n(Vote::Yes) == 1 && n(Vote::NotSure) >= 2;
    let mild_no_rule = n(Vote::NotSure) >= 2 && n(Vote::Yes) == 0;
    let fired = [(yes_rule, ExprCategory::Yes), (no_rule, ExprCategory::No), (mild_yes_rule, ExprCategory::MildYes), (mild_no_rule, ExprCategory::MildNo)];
    fired.iter().find(|(f, _)| *f).map(|(_, c)| *c).expect("some rule fires for every pattern")
}


/// Concordance and product-moment correlation from statrs population moments.
pub fn correlation_oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
    use statrs::statistics::Statistics;
    let (mx, my) = (x.iter().mean(), y.iter().mean());
    let (vx, vy) = (x.iter().population_variance(), y.iter().population_variance());
    let cov = x.iter().population_covariance(y.iter());
    (2.0 * cov / (vx + vy + (mx - my).powi(2)), cov / (vx.sqrt() * vy.sqrt()))
}

/// (wa, uwa, f) from the four confusion counts.
pub fn class_scores_oracle(preds: &[bool], labels: &[bool]) -> (f64, f64, f64) {
    let count = |p: bool, l: bool| preds.iter().zip(labels).filter(|(a, b)| **a == p && **b == l).count() as f64;
    let (tp, fp, tn, fn_) = (count(true, true), count(true, false), count(false, false), count(false, true));
    let f = if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
    ((tp + tn) / labels.len() as f64, 0.5 * (tp / (tp + fn_) + tn / (tn + fp)), f)
}

#[derive(Debug, Default)]
pub struct MetricSweep {
    pub count_mismatches: usize,
    pub max_eer_err: f64,
    pub max_class_err: f64,
    pub max_corr_err: f64,
}

/// Compares every metric with its oracle on `n` seeded random inputs each.
pub fn metric_sweep(seed: u64, n: usize) -> MetricSweep {
    use rand::SeedableRng;
    use xprs_core::metrics::{ccc, eer, pearson, roc_curve, wa_uwa_f, ScoredSet};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = MetricSweep::default();
    for _ in 0..n {
        let (scores, labels) = random_case(&mut rng);
        let set = ScoredSet::new(scores.clone(), labels.clone()).unwrap();
        let roc = roc_curve(&set).unwrap();
        let thresholds = oracle_thresholds(&scores);
        if roc.len() != thresholds.len() {
            out.count_mismatches += 1;
        } else {
            for (p, &t) in roc.iter().zip(&thresholds) {
                if p.threshold != t || (p.far, p.frr) != rates_at(&scores, &labels, t) {
                    out.count_mismatches += 1;
                }
            }
        }
        out.max_eer_err = out.max_eer_err.max((eer(&set).unwrap() - eer_oracle(&scores, &labels)).abs());

        let preds: Vec<bool> = labels.iter().map(|_| rng.random_bool(0.5)).collect();
        let c = wa_uwa_f(&preds, &labels).unwrap();
        let (wa, uwa, f) = class_scores_oracle(&preds, &labels);
        out.max_class_err = out.max_class_err.max((c.wa - wa).abs()).max((c.uwa - uwa).abs()).max((c.f_score - f).abs());

        let m = rng.random_range(3..200);
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..7.0)).collect();
        let k = rng.random_range(-1.0..1.0);
        let y: Vec<f64> = x.iter().map(|v| k * v + rng.random_range(0.0..3.0)).collect();
        let (cc, r) = correlation_oracle(&x, &y);
        out.max_corr_err = out.max_corr_err.max((ccc(&x, &y).unwrap() - cc).abs()).max((pearson(&x, &y).unwrap() - r).abs());
    }
    out
}
