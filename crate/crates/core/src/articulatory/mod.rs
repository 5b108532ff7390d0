//! Tract-variable (TV) estimation from spliced cepstra and the analysis of
//! TV variation against valence.
//!
//! TV trajectories are `T × 8` [`FeatureMatrix`] values of kind
//! [`FeatureKind::Tv8`] with columns in [`TV_NAMES`] order.

mod inversion;
mod oracle;

use serde::{Deserialize, Serialize};

pub use inversion::{estimate_from_spliced, estimate_tvs, estimate_tvs_batch, train_inversion, InversionConfig};
pub use oracle::{ForwardMap, OraclePair};

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureMatrix};
use crate::metrics::pearson;

pub const N_TVS: usize = 8;

/// Glottis, velum, lip protrusion, lip aperture, tongue-tip constriction
/// location/degree, tongue-body constriction location/degree.
pub const TV_NAMES: [&str; N_TVS] = ["GLO", "VEL", "LP", "LA", "TTCL", "TTCD", "TBCL", "TBCD"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvCorrelationReport {
    /// Pearson r per TV, in [`TV_NAMES`] order; 0 where undefined.
    pub r: [f64; N_TVS],
    /// True where either variable had zero variance.
    pub degenerate: [bool; N_TVS],
    pub n_utterances: usize,
}

/// Temporal standard deviation of each TV over one utterance.
pub fn tv_variation(tv: &FeatureMatrix) -> Result<[f64; N_TVS]> {
    if tv.kind() != FeatureKind::Tv8 {
        return Err(Error::WrongKind { expected: "Tv8".into(), got: tv.kind().to_string() });
    }
    if tv.rows() == 0 {
        return Err(Error::TooFewFrames(0));
    }
    let n = tv.rows() as f64;
    let mut out = [0.0; N_TVS];
    for (j, o) in out.iter_mut().enumerate() {
        let col = tv.column(j);
        let m = col.iter().sum::<f64>() / n;
        *o = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    }
    Ok(out)
}

/// Correlates per-utterance TV variation with valence across utterances.
pub fn tv_valence_correlation(items: &[(&FeatureMatrix, f64)]) -> Result<TvCorrelationReport> {
    if items.len() < 3 {
        return Err(Error::TooFewQueries(items.len()));
    }
    let stats: Vec<[f64; N_TVS]> = items.iter().map(|(tv, _)| tv_variation(tv)).collect::<Result<_>>()?;
    let valence: Vec<f64> = items.iter().map(|(_, v)| *v).collect();
    let mut report = TvCorrelationReport { r: [0.0; N_TVS], degenerate: [false; N_TVS], n_utterances: items.len() };
    for j in 0..N_TVS {
        let x: Vec<f64> = stats.iter().map(|s| s[j]).collect();
        match pearson(&x, &valence) {
            Ok(r) => report.r[j] = r,
            Err(Error::DegenerateVariance) => report.degenerate[j] = true,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}
