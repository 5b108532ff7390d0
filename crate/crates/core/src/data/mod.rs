//! Graded-query handling: vote aggregation, emotion scaling, filtering,
//! splitting, manifests, and the synthetic corpus generator.

mod manifest;
mod split;
mod synth;
mod tract;

use serde::{Deserialize, Serialize};

pub use manifest::{read_manifest, read_manifest_file, read_split_file, write_manifest, write_manifest_file, write_split_file};
pub use split::{make_splits, DatasetSplit, SplitRatios};
pub use synth::{synth_corpus, write_corpus, SynthConfig, SynthQuery};
pub use tract::{synthesize, TractFrame, TractParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Yes,
    No,
    NotSure,
}

impl Vote {
    /// Ordinal value used for grade averaging.
    pub fn grade(self) -> u8 {
        match self {
            Vote::Yes => 2,
            Vote::NotSure => 1,
            Vote::No => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExprCategory {
    Yes,
    MildYes,
    MildNo,
    No,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedQuery {
    pub id: String,
    pub audio: String,
    pub transcript: String,
    pub expr_votes: Vec<Vote>,
    pub valence_votes: Vec<u8>,
    pub arousal_votes: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryLabel {
    pub category: ExprCategory,
    pub numeric_grade: f64,
    pub binary_expressive: bool,
    pub valence: f64,
    pub arousal: f64,
}

/// Category, mean 0/1/2 grade and binary label of four expression votes.
///
/// Overlapping rules resolve as Yes > No > MildYes > MildNo; every vote
/// pattern lands in exactly one category.
pub fn aggregate_expression(votes: &[Vote]) -> Result<(ExprCategory, f64, bool)> {
    if votes.len() != 4 {
        return Err(Error::BadVoteCount(votes.len()));
    }
    let count = |v: Vote| votes.iter().filter(|&&x| x == v).count();
    let (yes, no, ns) = (count(Vote::Yes), count(Vote::No), count(Vote::NotSure));
    let category = if yes >= 2 {
        ExprCategory::Yes
    } else if no >= 2 {
        ExprCategory::No
    } else if yes == 1 && ns >= 2 {
        ExprCategory::MildYes
    } else {
        // yes == 0 and no <= 1, so ns >= 3
        ExprCategory::MildNo
    };
    let grade = votes.iter().map(|v| v.grade() as f64).sum::<f64>() / 4.0;
    Ok((category, grade, category == ExprCategory::Yes))
}

/// Mean of four 1–3 grades mapped affinely onto 1–7.
pub fn scale_emotion(votes: &[u8]) -> Result<f64> {
    if votes.len() != 4 {
        return Err(Error::BadVoteCount(votes.len()));
    }
    if let Some(v) = votes.iter().find(|v| !(1..=3).contains(*v)) {
        return Err(Error::BadVoteValue(v.to_string()));
    }
    let mean = votes.iter().map(|&v| v as f64).sum::<f64>() / 4.0;
    Ok(3.0 * mean - 2.0)
}

impl GradedQuery {
    pub fn label(&self) -> Result<QueryLabel> {
        let (category, numeric_grade, binary_expressive) = aggregate_expression(&self.expr_votes)?;
        Ok(QueryLabel {
            category,
            numeric_grade,
            binary_expressive,
            valence: scale_emotion(&self.valence_votes)?,
            arousal: scale_emotion(&self.arousal_votes)?,
        })
    }

    pub fn all_not_sure(&self) -> bool {
        self.expr_votes.len() == 4 && self.expr_votes.iter().all(|&v| v == Vote::NotSure)
    }
}

/// Drops queries on which all four graders were unsure.
pub fn filter_all_not_sure(queries: Vec<GradedQuery>) -> Vec<GradedQuery> {
    queries.into_iter().filter(|q| !q.all_not_sure()).collect()
}
