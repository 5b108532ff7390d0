use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ccc, eer_with_threshold, roc_curve, wa_uwa_f, ClassScores, RocPoint, ScoredSet};
use crate::error::Result;

/// Classification scores at a fixed decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operating {
    #[serde(with = "extended_f64")]
    pub threshold: f64,
    #[serde(flatten)]
    pub scores: ClassScores,
}

impl Operating {
    pub fn at(s: &ScoredSet, threshold: f64) -> Result<Self> {
        let preds: Vec<bool> = s.scores().iter().map(|&v| v >= threshold).collect();
        Ok(Self { threshold, scores: wa_uwa_f(&preds, s.labels())? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_pos: usize,
    pub n_neg: usize,
    pub eer: f64,
    /// WA/UWA/F at the operating point closest to the EER (the reported default).
    pub wa: f64,
    pub uwa: f64,
    pub f_score: f64,
    pub at_eer: Operating,
    pub at_half: Operating,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccc_valence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccc_arousal: Option<f64>,
    #[serde(with = "roc_points")]
    pub roc: Vec<RocPoint>,
}

impl EvalReport {
    pub fn from_scores(s: &ScoredSet) -> Result<Self> {
        let roc = roc_curve(s)?;
        let (eer, t) = eer_with_threshold(s)?;
        let at_eer = Operating::at(s, t)?;
        Ok(Self {
            n_pos: s.n_pos(),
            n_neg: s.n_neg(),
            eer,
            wa: at_eer.scores.wa,
            uwa: at_eer.scores.uwa,
            f_score: at_eer.scores.f_score,
            at_eer,
            at_half: Operating::at(s, 0.5)?,
            ccc_valence: None,
            ccc_arousal: None,
            roc,
        })
    }

    /// Adds valence/arousal agreement of predicted against reference grades.
    pub fn with_emotion(mut self, valence: (&[f64], &[f64]), arousal: (&[f64], &[f64])) -> Result<Self> {
        self.ccc_valence = Some(ccc(valence.0, valence.1)?);
        self.ccc_arousal = Some(ccc(arousal.0, arousal.1)?);
        Ok(self)
    }
}

/// `threshold,far,frr` CSV, one operating point per line.
pub fn roc_csv(roc: &[RocPoint]) -> String {
    let mut out = String::from("threshold,far,frr\n");
    for p in roc {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.far, p.frr));
    }
    out
}

/// JSON has no infinities; the ROC sentinels are written as `"inf"` / `"-inf"`.
mod extended_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

mod roc_points {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Point {
        #[serde(with = "extended_f64")]
        threshold: f64,
        far: f64,
        frr: f64,
    }

    pub fn serialize<S: Serializer>(v: &[RocPoint], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|p| Point { threshold: p.threshold, far: p.far, frr: p.frr }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<RocPoint>, D::Error> {
        let pts = Vec::<Point>::deserialize(d)?;
        Ok(pts.into_iter().map(|p| RocPoint { threshold: p.threshold, far: p.far, frr: p.frr }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_roundtrips_through_json() {
        let s = ScoredSet::new(vec![0.9, 0.8, 0.4, 0.1, 0.2, 0.6], vec![true, true, true, false, false, false]).unwrap();
        let r = EvalReport::from_scores(&s).unwrap();
        assert_eq!(r.eer, 1.0 / 3.0);
        assert_eq!(r.at_eer.threshold, 0.6);
        assert!((r.wa - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.at_half.scores.wa, 4.0 / 6.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"-inf\""));
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let csv = roc_csv(&r.roc);
        assert!(csv.starts_with("threshold,far,frr\n-inf,1,0\n"));
        assert!(csv.ends_with("inf,0,1\n"));
    }
}
