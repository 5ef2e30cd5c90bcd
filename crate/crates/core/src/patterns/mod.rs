//! Candidate patterns from clustering element representations, salience
//! scoring of element groups, and the ranked pattern report.

mod cluster;
mod report;

pub use cluster::average_linkage;
pub use report::{summarize, CorePatternLink, Pattern, PatternReport};

use crate::effects::{ChartFeatureTable, Dim, DIM_COUNT};
use crate::model::{consistency, cosine, ElementRepresentation, ModelError, PerceptionModel};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

pub const SIMILARITY_THRESHOLD: f64 = 0.9;
pub const SIMILAR_PATTERN_JACCARD: f64 = 0.8;
pub const INTER_FLOOR: f64 = 1e-9;
pub const TOP_DIMENSIONS: usize = 5;
/// Largest possible variance of values confined to `[0, 1]`.
const MAX_UNIT_VARIANCE: f64 = 0.25;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("pattern identification needs at least two elements")]
    TooFewElements,
    #[error("group covers every element in scope; salience is undefined")]
    WholeChartGroup,
    #[error("group is empty")]
    EmptyGroup,
    #[error("unknown element id `{0}`")]
    UnknownElementId(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupOrigin {
    ModelFull,
    ModelSubrep { index: usize },
    UserSelection,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementGroup {
    /// In document order.
    pub element_ids: Vec<String>,
    pub origin: GroupOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalienceScore {
    pub ratio: f64,
    /// `100 · ratio / (1 + ratio)`
    pub display: f64,
    pub intra_avg: f64,
    pub inter_avg: f64,
}

impl SalienceScore {
    pub fn from_averages(intra_avg: f64, inter_avg: f64) -> Self {
        let ratio = intra_avg / inter_avg.max(INTER_FLOOR);
        SalienceScore {
            ratio,
            display: display_salience(ratio),
            intra_avg,
            inter_avg,
        }
    }
}

pub fn display_salience(ratio: f64) -> f64 {
    100.0 * ratio / (1.0 + ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimContribution {
    pub dim: Dim,
    pub contribution: f64,
}

/// A model applied to one chart's features, with pairwise consistency cached.
#[derive(Debug, Clone)]
pub struct ChartScorer<'a> {
    pub table: &'a ChartFeatureTable,
    pub representations: Vec<ElementRepresentation>,
    consistency: Vec<Vec<f64>>,
}

impl<'a> ChartScorer<'a> {
    pub fn new(model: &PerceptionModel, table: &'a ChartFeatureTable) -> Result<Self, PatternError> {
        let representations = model.represent(table)?;
        let inputs: Vec<[f64; DIM_COUNT]> = table.vectors.iter().map(|v| v.masked_values()).collect();
        let n = table.len();
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = consistency(
                    &representations[i].weights,
                    &inputs[i],
                    &representations[j].weights,
                    &inputs[j],
                );
                c[i][j] = v;
                c[j][i] = v;
            }
        }
        Ok(ChartScorer {
            table,
            representations,
            consistency: c,
        })
    }

    pub fn consistency(&self, i: usize, j: usize) -> f64 {
        self.consistency[i][j]
    }

    /// Row indices for `ids`, deduplicated and in document order.
    pub fn indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>, PatternError> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            out.push(
                self.table
                    .index_of(id)
                    .ok_or_else(|| PatternError::UnknownElementId(id.to_string()))?,
            );
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(PatternError::EmptyGroup);
        }
        Ok(out)
    }

    pub fn salience_of(&self, members: &[usize]) -> Result<SalienceScore, PatternError> {
        if members.is_empty() {
            return Err(PatternError::EmptyGroup);
        }
        let inside: HashSet<usize> = members.iter().copied().collect();
        let outside: Vec<usize> = (0..self.table.len()).filter(|i| !inside.contains(i)).collect();
        if outside.is_empty() {
            return Err(PatternError::WholeChartGroup);
        }
        let mut intra = 0.0;
        let mut pairs = 0usize;
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                intra += self.consistency[i][j];
                pairs += 1;
            }
        }
        let intra_avg = if pairs == 0 { 1.0 } else { intra / pairs as f64 };
        let inter: f64 = members
            .iter()
            .flat_map(|&i| outside.iter().map(move |&o| (i, o)))
            .map(|(i, o)| self.consistency[i][o])
            .sum();
        let inter_avg = inter / (members.len() * outside.len()) as f64;
        Ok(SalienceScore::from_averages(intra_avg, inter_avg))
    }

    pub fn salience<S: AsRef<str>>(&self, ids: &[S]) -> Result<SalienceScore, PatternError> {
        self.salience_of(&self.indices(ids)?)
    }

    /// Every dimension ranked by contribution to the group's coherence.
    pub fn contributions(&self, members: &[usize]) -> Vec<DimContribution> {
        let rows: Vec<([f64; DIM_COUNT], &[f64])> = members
            .iter()
            .map(|&i| (self.table.vectors[i].masked_values(), self.representations[i].weights.as_slice()))
            .collect();
        let present: Vec<bool> = (0..DIM_COUNT)
            .map(|d| members.iter().all(|&i| self.table.vectors[i].presence_mask[d]))
            .collect();
        rank_contributions(&rows, &present)
    }

    pub fn identify(&self, threshold: f64) -> Result<Vec<ElementGroup>, PatternError> {
        let n = self.table.len();
        if n < 2 {
            return Err(PatternError::TooFewElements);
        }
        let subreps = self.representations[0].subreps().count();
        let metrics = std::iter::once(GroupOrigin::ModelFull)
            .chain((0..subreps).map(|index| GroupOrigin::ModelSubrep { index }));
        let mut seen = HashSet::new();
        let mut groups = Vec::new();
        for origin in metrics {
            let vectors: Vec<&[f64]> = self
                .representations
                .iter()
                .map(|r| match origin {
                    GroupOrigin::ModelSubrep { index } => r.subrep(index),
                    _ => r.embedding.as_slice(),
                })
                .collect();
            let similarity: Vec<Vec<f64>> = vectors
                .iter()
                .map(|a| vectors.iter().map(|b| cosine(a, b)).collect())
                .collect();
            for cluster in average_linkage(&similarity, threshold) {
                if cluster.len() >= 2 && seen.insert(cluster.clone()) {
                    groups.push(ElementGroup {
                        element_ids: cluster.iter().map(|&i| self.table.element_ids[i].clone()).collect(),
                        origin,
                    });
                }
            }
        }
        Ok(groups)
    }

    /// Full pattern entry: salience (absent for a whole-chart group), top
    /// contributing dimensions and element kind counts.
    pub fn pattern(&self, group: ElementGroup, kinds: &BTreeMap<String, &'static str>) -> Result<Pattern, PatternError> {
        let members = self.indices(&group.element_ids)?;
        let salience = match self.salience_of(&members) {
            Ok(s) => Some(s),
            Err(PatternError::WholeChartGroup) => None,
            Err(e) => return Err(e),
        };
        let contributing_dims = self
            .contributions(&members)
            .into_iter()
            .take(TOP_DIMENSIONS)
            .map(|c| c.dim.name().to_string())
            .collect();
        let mut type_counts = BTreeMap::new();
        for id in &group.element_ids {
            if let Some(kind) = kinds.get(id) {
                *type_counts.entry(kind.to_string()).or_insert(0) += 1;
            }
        }
        Ok(Pattern {
            group,
            salience,
            contributing_dims,
            type_counts,
        })
    }
}

/// Contribution per dimension: mean weighted value `|w|·v` over the group
/// times `1 − var(v) / 0.25`. Sorted descending; ties keep dimensions present
/// on every member first, then layout order.
pub fn rank_contributions(rows: &[([f64; DIM_COUNT], &[f64])], present: &[bool]) -> Vec<DimContribution> {
    let n = rows.len().max(1) as f64;
    let mut out: Vec<(DimContribution, bool)> = Dim::ALL
        .iter()
        .map(|&dim| {
            let d = dim.index();
            let mean_weighted = rows.iter().map(|(v, w)| w[d].abs() * v[d]).sum::<f64>() / n;
            let mean = rows.iter().map(|(v, _)| v[d]).sum::<f64>() / n;
            let var = rows.iter().map(|(v, _)| (v[d] - mean).powi(2)).sum::<f64>() / n;
            let spread = (var / MAX_UNIT_VARIANCE).min(1.0);
            (
                DimContribution {
                    dim,
                    contribution: mean_weighted * (1.0 - spread),
                },
                present[d],
            )
        })
        .collect();
    out.sort_by(|(a, pa), (b, pb)| {
        b.contribution
            .total_cmp(&a.contribution)
            .then(pb.cmp(pa))
            .then(a.dim.cmp(&b.dim))
    });
    out.into_iter().map(|(c, _)| c).collect()
}

pub fn identify_patterns(model: &PerceptionModel, table: &ChartFeatureTable) -> Result<Vec<ElementGroup>, PatternError> {
    ChartScorer::new(model, table)?.identify(SIMILARITY_THRESHOLD)
}

pub fn salience<S: AsRef<str>>(
    model: &PerceptionModel,
    group: &[S],
    table: &ChartFeatureTable,
) -> Result<SalienceScore, PatternError> {
    ChartScorer::new(model, table)?.salience(group)
}

pub fn contributing_dimensions<S: AsRef<str>>(
    model: &PerceptionModel,
    group: &[S],
    table: &ChartFeatureTable,
) -> Result<Vec<DimContribution>, PatternError> {
    let scorer = ChartScorer::new(model, table)?;
    Ok(scorer.contributions(&scorer.indices(group)?))
}
