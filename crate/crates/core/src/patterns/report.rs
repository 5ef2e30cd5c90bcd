use super::{ElementGroup, SalienceScore, SIMILAR_PATTERN_JACCARD};
use crate::evaluation::jaccard;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub group: ElementGroup,
    /// `None` when the group covers the whole scope.
    pub salience: Option<SalienceScore>,
    pub contributing_dims: Vec<String>,
    pub type_counts: BTreeMap<String, usize>,
}

/// Two patterns overlapping by more than the Jaccard threshold, and the index
/// of their shared core in `core_patterns`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorePatternLink {
    pub a: usize,
    pub b: usize,
    pub core: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub revision: u64,
    pub patterns: Vec<Pattern>,
    pub core_patterns: Vec<Vec<String>>,
    pub similar_links: Vec<CorePatternLink>,
}

/// Sort by display salience (undefined last), then link every pair whose
/// Jaccard similarity strictly exceeds the threshold and record the shared core.
pub fn summarize(mut patterns: Vec<Pattern>, revision: u64) -> PatternReport {
    patterns.sort_by(|a, b| {
        let key = |p: &Pattern| p.salience.map(|s| s.display);
        match (key(a), key(b)) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
    });
    let mut core_patterns: Vec<Vec<String>> = Vec::new();
    let mut similar_links = Vec::new();
    for a in 0..patterns.len() {
        for b in (a + 1)..patterns.len() {
            let ga = &patterns[a].group.element_ids;
            let gb = &patterns[b].group.element_ids;
            if jaccard(ga, gb) <= SIMILAR_PATTERN_JACCARD {
                continue;
            }
            let in_b: HashSet<&String> = gb.iter().collect();
            let core: Vec<String> = ga.iter().filter(|id| in_b.contains(id)).cloned().collect();
            let index = match core_patterns.iter().position(|c| same_set(c, &core)) {
                Some(i) => i,
                None => {
                    core_patterns.push(core);
                    core_patterns.len() - 1
                }
            };
            similar_links.push(CorePatternLink { a, b, core: index });
        }
    }
    PatternReport {
        revision,
        patterns,
        core_patterns,
        similar_links,
    }
}

fn same_set(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().collect::<HashSet<_>>() == b.iter().collect::<HashSet<_>>()
}
