use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GradedQuery;
use crate::error::{Error, Result};

/// Relative sizes of the four partitions; need not sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub pretrain: f64,
    pub balanced_train: f64,
    pub dev: f64,
    pub eval: f64,
}

impl Default for SplitRatios {
    /// Proportional to 60/30/4/3 hours.
    fn default() -> Self {
        Self { pretrain: 60.0, balanced_train: 30.0, dev: 4.0, eval: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub pretrain: Vec<String>,
    pub balanced_train: Vec<String>,
    pub dev: Vec<String>,
    pub eval: Vec<String>,
}

impl DatasetSplit {
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for id in self.pretrain.iter().chain(&self.balanced_train).chain(&self.dev).chain(&self.eval) {
            if !seen.insert(id) {
                return Err(Error::Format(format!("query {id} appears in more than one partition")));
            }
        }
        Ok(())
    }
}

/// Seeded split: dev and eval are held out first, the balanced set takes an
/// equal number of each class within its allocation, and every other query
/// goes to pretraining.
pub fn make_splits(queries: &[GradedQuery], ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    let parts = [ratios.pretrain, ratios.balanced_train, ratios.dev, ratios.eval];
    if parts.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) || parts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Format("split ratios must be non-negative with a positive sum".into()));
    }
    let total: f64 = parts.iter().sum();
    let mut labeled = Vec::with_capacity(queries.len());
    for q in queries {
        labeled.push((q.id.clone(), q.label()?.binary_expressive));
    }
    let (n_pos, n_neg) = labeled.iter().fold((0, 0), |(p, n), (_, l)| if *l { (p + 1, n) } else { (p, n + 1) });
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InsufficientData(format!("{n_pos} expressive and {n_neg} non-expressive queries")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labeled.shuffle(&mut rng);
    let n = labeled.len();
    let share = |r: f64| ((r / total) * n as f64).round() as usize;
    let n_dev = share(ratios.dev);
    let n_eval = share(ratios.eval).min(n - n_dev.min(n));
    let n_dev = n_dev.min(n);

    let ids = |v: &[(String, bool)]| v.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>();
    let dev = ids(&labeled[..n_dev]);
    let eval = ids(&labeled[n_dev..n_dev + n_eval]);
    let pool = &labeled[n_dev + n_eval..];

    let per_class = share(ratios.balanced_train) / 2;
    let pos_avail = pool.iter().filter(|(_, l)| *l).count();
    let neg_avail = pool.len() - pos_avail;
    let k = per_class.min(pos_avail).min(neg_avail);
    let (mut taken_pos, mut taken_neg) = (0, 0);
    let mut balanced_train = Vec::new();
    let mut pretrain = Vec::new();
    for (id, l) in pool {
        let slot = if *l { &mut taken_pos } else { &mut taken_neg };
        if *slot < k {
            *slot += 1;
            balanced_train.push(id.clone());
        } else {
            pretrain.push(id.clone());
        }
    }
    Ok(DatasetSplit { pretrain, balanced_train, dev, eval })
}
