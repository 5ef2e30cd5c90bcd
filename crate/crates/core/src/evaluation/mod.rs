//! Agreement metrics between model groups and human patterns, the top-k
//! evaluation protocol, and a planted-grouping synthetic corpus.

mod planted;
mod run;

pub use planted::{generate_planted_corpus, Count, GroupingChannel, PlantedConfig, PlantedCorpus};
pub use run::{evaluate_corpus, split_corpus, ChartEvaluation, EvaluationReport, MetricSummary};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("no human patterns to compare against")]
    NoHumanPatterns,
    #[error("no model groups to compare against")]
    NoModelGroups,
}

/// `|a ∩ b| / |a ∪ b|` treating both as sets; two empty sets score 1.
pub fn jaccard<T: Eq + Hash>(a: &[T], b: &[T]) -> f64 {
    let sa: HashSet<&T> = a.iter().collect();
    let sb: HashSet<&T> = b.iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

fn best_match_mean<T: Eq + Hash>(from: &[Vec<T>], against: &[Vec<T>]) -> f64 {
    from.iter()
        .map(|g| against.iter().map(|h| jaccard(g, h)).fold(0.0, f64::max))
        .sum::<f64>()
        / from.len() as f64
}

/// Mean over model groups of the best Jaccard against any human pattern.
pub fn ega<T: Eq + Hash>(model_groups: &[Vec<T>], human_patterns: &[Vec<T>]) -> Result<f64, EvaluationError> {
    if human_patterns.is_empty() {
        return Err(EvaluationError::NoHumanPatterns);
    }
    if model_groups.is_empty() {
        return Err(EvaluationError::NoModelGroups);
    }
    Ok(best_match_mean(model_groups, human_patterns))
}

/// Mean over human patterns of the best Jaccard against any model group.
pub fn pcr<T: Eq + Hash>(model_groups: &[Vec<T>], human_patterns: &[Vec<T>]) -> Result<f64, EvaluationError> {
    if model_groups.is_empty() {
        return Err(EvaluationError::NoModelGroups);
    }
    if human_patterns.is_empty() {
        return Err(EvaluationError::NoHumanPatterns);
    }
    Ok(best_match_mean(human_patterns, model_groups))
}

/// Co-membership counts for each unordered pair of distinct elements.
pub fn association_counts<T: Ord + Clone + Hash>(groups: &[Vec<T>]) -> BTreeMap<(T, T), u32> {
    let mut counts = BTreeMap::new();
    for g in groups {
        let mut members: Vec<&T> = g.iter().collect::<HashSet<_>>().into_iter().collect();
        members.sort();
        for (x, a) in members.iter().enumerate() {
            for b in &members[x + 1..] {
                *counts.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Cosine similarity of the two association matrices after Frobenius
/// normalisation; 0 when either has no co-membership at all.
pub fn ac<T: Ord + Clone + Hash>(model_groups: &[Vec<T>], human_patterns: &[Vec<T>]) -> f64 {
    let m = association_counts(model_groups);
    let h = association_counts(human_patterns);
    let norm = |c: &BTreeMap<(T, T), u32>| c.values().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt();
    let (nm, nh) = (norm(&m), norm(&h));
    if nm == 0.0 || nh == 0.0 {
        return 0.0;
    }
    let dot: f64 = m
        .iter()
        .filter_map(|(k, &v)| h.get(k).map(|&w| f64::from(v) * f64::from(w)))
        .sum();
    dot / (nm * nh)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ega: f64,
    pub pcr: f64,
    pub ac: f64,
}
