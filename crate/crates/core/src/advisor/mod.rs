//! Dimension usage assessment and edit suggestions that raise the salience
//! of a selected element group.

mod histogram;
mod suggest;

pub use histogram::{effect_histograms, DimensionHistogram, HISTOGRAM_BINS};
pub use suggest::{apply_suggestion, generate_suggestions, Channel, Suggestion, SuggestionKind};

use crate::chart::{ChartDocument, ChartError};
use crate::effects::{extract_features_scoped, ChartFeatureTable, Dim, FeatureError};
use crate::model::ModelError;
use crate::patterns::PatternError;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Raw values closer than this count as the same effect.
pub const USAGE_TOLERANCE: f64 = 1e-6;
/// At most this many distinct values marks a dimension as low diversity.
pub const LOW_DIVERSITY_MAX: usize = 3;
/// In-group variance of normalised values above which an effect is inconsistent.
pub const HIGH_VARIANCE: f64 = 0.05;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AdvisorError {
    #[error("scope is empty")]
    EmptyScope,
    #[error("group is empty")]
    EmptyGroup,
    #[error("unknown element id `{0}`")]
    UnknownElementId(String),
    #[error("group covers every element in scope")]
    WholeChartGroup,
    #[error("suggestion was generated for a different revision of the chart")]
    StaleSuggestion,
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Features(FeatureError),
    #[error(transparent)]
    Patterns(PatternError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<FeatureError> for AdvisorError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::UnknownElementId(id) => AdvisorError::UnknownElementId(id),
            e => AdvisorError::Features(e),
        }
    }
}

impl From<PatternError> for AdvisorError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::WholeChartGroup => AdvisorError::WholeChartGroup,
            PatternError::EmptyGroup => AdvisorError::EmptyGroup,
            PatternError::UnknownElementId(id) => AdvisorError::UnknownElementId(id),
            e => AdvisorError::Patterns(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionUsage {
    pub dim: Dim,
    pub distinct_values: usize,
    pub in_use: bool,
    pub low_diversity: bool,
}

/// Dimensions that must not be manipulated while another member is in use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictRule {
    pub dims: Vec<Dim>,
}

impl ConflictRule {
    pub fn builtin() -> Vec<ConflictRule> {
        use Dim::*;
        [
            vec![BboxHeight, BboxTop, BboxBottom],
            vec![BboxWidth, BboxLeft, BboxRight],
            vec![Area, BboxWidth, BboxHeight],
        ]
        .into_iter()
        .map(|dims| ConflictRule { dims })
        .collect()
    }

    /// True when `dim` shares this rule with another dimension that is in use.
    pub fn blocks(&self, dim: Dim, usage: &[DimensionUsage]) -> bool {
        self.dims.contains(&dim)
            && self
                .dims
                .iter()
                .filter(|d| **d != dim)
                .any(|d| usage.iter().any(|u| u.dim == *d && u.in_use))
    }
}

pub fn conflicts(dim: Dim, usage: &[DimensionUsage], rules: &[ConflictRule]) -> bool {
    rules.iter().any(|r| r.blocks(dim, usage))
}

/// Number of distinct raw values per dimension over the scoped elements.
/// Elements lacking the effect contribute nothing; dimensions absent on every
/// element are omitted.
pub fn usage_from_table(table: &ChartFeatureTable, rows: &[usize]) -> Vec<DimensionUsage> {
    let mut out: Vec<DimensionUsage> = Dim::ALL
        .iter()
        .filter_map(|&dim| {
            let d = dim.index();
            let mut values: Vec<f64> = rows
                .iter()
                .filter(|&&i| table.raw[i].presence_mask[d])
                .map(|&i| table.raw[i].values[d])
                .collect();
            if values.is_empty() {
                return None;
            }
            values.sort_by(f64::total_cmp);
            let distinct_values = 1 + values.windows(2).filter(|w| w[1] - w[0] > USAGE_TOLERANCE).count();
            Some(DimensionUsage {
                dim,
                distinct_values,
                in_use: distinct_values > 1,
                low_diversity: distinct_values > 1 && distinct_values <= LOW_DIVERSITY_MAX,
            })
        })
        .collect();
    out.sort_by(|a, b| b.distinct_values.cmp(&a.distinct_values).then(a.dim.cmp(&b.dim)));
    out
}

/// Usage over `scope`, with every other element removed from perception.
pub fn usage_summary<S: AsRef<str>>(doc: &ChartDocument, scope: &[S]) -> Result<Vec<DimensionUsage>, AdvisorError> {
    if scope.is_empty() {
        return Err(AdvisorError::EmptyScope);
    }
    let wanted: HashSet<&str> = scope.iter().map(|s| s.as_ref()).collect();
    if let Some(missing) = wanted.iter().find(|id| doc.element(id).is_none()) {
        return Err(AdvisorError::UnknownElementId(missing.to_string()));
    }
    let excluded: Vec<&str> = doc
        .elements
        .iter()
        .map(|e| e.id.as_str())
        .filter(|id| !wanted.contains(id))
        .collect();
    let table = extract_features_scoped(doc, &excluded)?;
    let rows: Vec<usize> = (0..table.len()).collect();
    Ok(usage_from_table(&table, &rows))
}
