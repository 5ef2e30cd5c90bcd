//! End-to-end entry points shared by the CLI and the HTTP service.

use crate::annotations::{extract_positive_pairs, sample_negative_pairs, AnnotationCorpus, AnnotationError};
use crate::chart::{ChartDocument, ChartError};
use crate::effects::{extract_features_scoped, FeatureError};
use crate::model::{train, ModelConfig, ModelError, TrainingRun};
use crate::patterns::{summarize, ChartScorer, PatternError, PatternReport, SIMILARITY_THRESHOLD};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Patterns(#[from] PatternError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Annotations(#[from] AnnotationError),
}

/// Identify, score and summarise the patterns of `doc` with `excluded`
/// elements removed from the perception scope.
pub fn assess<S: AsRef<str>>(
    model: &crate::model::PerceptionModel,
    doc: &ChartDocument,
    excluded: &[S],
    revision: u64,
) -> Result<PatternReport, PipelineError> {
    let table = extract_features_scoped(doc, excluded)?;
    let scorer = ChartScorer::new(model, &table)?;
    let kinds: BTreeMap<String, &'static str> = doc.elements.iter().map(|e| (e.id.clone(), e.kind.name())).collect();
    let patterns = scorer
        .identify(SIMILARITY_THRESHOLD)?
        .into_iter()
        .map(|g| scorer.pattern(g, &kinds))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(patterns, revision))
}

/// The canonical JSON rendering of a report.
pub fn report_json(report: &PatternReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

/// Positive pairs plus kernel-sampled negatives from the corpus, then training.
pub fn train_on_corpus(config: &ModelConfig, corpus: &AnnotationCorpus) -> Result<(TrainingRun, Vec<String>), PipelineError> {
    let features = corpus.feature_tables()?;
    let mut pairs = extract_positive_pairs(corpus);
    let negatives = sample_negative_pairs(corpus, &features, corpus.rng_seed)?;
    pairs.extend(negatives.pairs);
    Ok((train(config, &pairs, &features)?, negatives.warnings))
}
