use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::MentionCluster;
use crate::{Error, Result};

/// Pairwise clustering quality.
///
/// When no pair is predicted (or no pair is true) the corresponding ratio is
/// undefined; it is reported as 1 and the `*_defined` flag is cleared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub predicted_pairs: u64,
    pub true_pairs: u64,
    pub correct_pairs: u64,
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Pairwise precision/recall/F1 of `clusters` against `truth`
/// (mention id to author label). Counted over all pairs of predicted
/// mentions.
pub fn evaluate_disambiguation(
    clusters: &[MentionCluster],
    truth: &BTreeMap<String, String>,
) -> Result<PairwiseScores> {
    let mut predicted_pairs = 0u64;
    let mut correct_pairs = 0u64;
    let mut truth_sizes: HashMap<&str, u64> = HashMap::new();
    for c in clusters {
        predicted_pairs += pairs(c.mention_ids.len() as u64);
        let mut overlap: HashMap<&str, u64> = HashMap::new();
        for m in &c.mention_ids {
            let label = truth.get(m).ok_or_else(|| Error::MissingTruth(m.clone()))?;
            *overlap.entry(label).or_default() += 1;
            *truth_sizes.entry(label).or_default() += 1;
        }
        correct_pairs += overlap.values().map(|&n| pairs(n)).sum::<u64>();
    }
    let true_pairs: u64 = truth_sizes.values().map(|&n| pairs(n)).sum();

    let precision_defined = predicted_pairs > 0;
    let recall_defined = true_pairs > 0;
    let precision = if precision_defined {
        correct_pairs as f64 / predicted_pairs as f64
    } else {
        1.0
    };
    let recall = if recall_defined {
        correct_pairs as f64 / true_pairs as f64
    } else {
        1.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PairwiseScores {
        precision,
        recall,
        f1,
        precision_defined,
        recall_defined,
        predicted_pairs,
        true_pairs,
        correct_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(id: &str, ms: &[&str]) -> MentionCluster {
        MentionCluster {
            author_id: id.into(),
            mention_ids: ms.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn truth(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(m, a)| (m.to_string(), a.to_string())).collect()
    }

    #[test]
    fn perfect_prediction() {
        let t = truth(&[("a", "X"), ("b", "X"), ("c", "Y")]);
        let s = evaluate_disambiguation(&[cl("1", &["a", "b"]), cl("2", &["c"])], &t).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_singletons() {
        let t = truth(&[("a", "X"), ("b", "X"), ("c", "Y")]);
        let s = evaluate_disambiguation(&[cl("1", &["a"]), cl("2", &["b"]), cl("3", &["c"])], &t).unwrap();
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.precision, 1.0);
        assert!(!s.precision_defined);
        assert!(s.recall_defined);
    }

    #[test]
    fn over_merge() {
        let t = truth(&[("a", "X"), ("b", "X"), ("c", "Y")]);
        let s = evaluate_disambiguation(&[cl("1", &["a", "b", "c"])], &t).unwrap();
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.recall, 1.0);
        assert_eq!((s.predicted_pairs, s.correct_pairs, s.true_pairs), (3, 1, 1));
    }

    #[test]
    fn missing_truth_label() {
        let t = truth(&[("a", "X")]);
        match evaluate_disambiguation(&[cl("1", &["a", "zz"])], &t) {
            Err(Error::MissingTruth(m)) => assert_eq!(m, "zz"),
            other => panic!("{other:?}"),
        }
    }
}
