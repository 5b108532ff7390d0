#[path = "support/oracles.rs"]
mod oracles;

use oracles::{all_expression_patterns, category_oracle};
use xprs_core::data::{aggregate_expression, filter_all_not_sure, scale_emotion, ExprCategory, GradedQuery, Vote};

#[test]
fn expression_votes_exhaustive() {
    let patterns = all_expression_patterns();
    assert_eq!(patterns.len(), 81);
    for v in &patterns {
        let (cat, grade, binary) = aggregate_expression(v).unwrap();
        assert_eq!(cat, category_oracle(v), "{v:?}");
        // grade in quarters: Yes=2, NotSure=1, No=0
        let quarters: u32 = v.iter().map(|x| match x { Vote::Yes => 2, Vote::NotSure => 1, Vote::No => 0 }).sum();
        assert_eq!(grade, quarters as f64 / 4.0, "{v:?}");
        assert_eq!(binary, cat == ExprCategory::Yes);
    }
}

#[test]
fn all_not_sure_filter_exhaustive() {
    let queries: Vec<GradedQuery> = all_expression_patterns()
        .into_iter()
        .enumerate()
        .map(|(i, v)| GradedQuery {
            id: format!("q{i}"),
            audio: String::new(),
            transcript: String::new(),
            expr_votes: v.to_vec(),
            valence_votes: vec![2; 4],
            arousal_votes: vec![2; 4],
            intent: None,
        })
        .collect();
    let kept = filter_all_not_sure(queries.clone());
    assert_eq!(kept.len(), 80);
    let dropped: Vec<_> = queries.iter().filter(|q| !kept.iter().any(|k| k.id == q.id)).collect();
    assert_eq!(dropped.len(), 1);
    assert!(dropped[0].expr_votes.iter().all(|&v| v == Vote::NotSure));
}

#[test]
fn emotion_votes_exhaustive() {
    let mut n = 0;
    for a in 1u8..=3 {
        for b in 1u8..=3 {
            for c in 1u8..=3 {
                for d in 1u8..=3 {
                    let sum = (a + b + c + d) as i32;
                    // 3 * sum / 4 - 2, kept exact in quarters
                    let expected = (3 * sum - 8) as f64 / 4.0;
                    assert_eq!(scale_emotion(&[a, b, c, d]).unwrap(), expected);
                    n += 1;
                }
            }
        }
    }
    assert_eq!(n, 81);
    assert_eq!(scale_emotion(&[1; 4]).unwrap(), 1.0);
    assert_eq!(scale_emotion(&[3; 4]).unwrap(), 7.0);
}

#[test]
fn malformed_votes_rejected() {
    assert!(aggregate_expression(&[Vote::Yes; 3]).is_err());
    assert!(scale_emotion(&[1, 2, 4, 1]).is_err());
    assert!(scale_emotion(&[0, 2, 2, 1]).is_err());
    assert!(scale_emotion(&[2, 2, 2]).is_err());
}
