use super::{ac, ega, pcr, Scores};
use crate::annotations::AnnotationCorpus;
use crate::model::PerceptionModel;
use crate::patterns::PatternError;
use crate::pipeline::{assess, PipelineError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartEvaluation {
    pub chart_id: String,
    /// Distinct annotated element sets; also the number of model groups kept.
    pub k: usize,
    pub ega: f64,
    pub pcr: f64,
    pub ac: f64,
    /// The model produced no groups; all three scores are 0.
    pub no_model_groups: bool,
    pub model_groups: Vec<Vec<String>>,
    pub human_patterns: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: Scores,
    /// Population standard deviation across charts.
    pub std: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub charts: Vec<ChartEvaluation>,
    pub overall: MetricSummary,
}

/// First `round(fraction · n)` charts train, the rest test, in corpus order.
pub fn split_corpus(corpus: &AnnotationCorpus, train_fraction: f64) -> (AnnotationCorpus, AnnotationCorpus) {
    let n = corpus.charts.len();
    let n_train = ((train_fraction * n as f64).round() as usize).min(n);
    let ids: Vec<String> = corpus.charts.iter().map(|c| c.id.clone()).collect();
    (corpus.subset(&ids[..n_train]), corpus.subset(&ids[n_train..]))
}

/// Score the model's top-k salient groups against each annotated chart,
/// with k the number of distinct annotated element sets.
pub fn evaluate_corpus(model: &PerceptionModel, corpus: &AnnotationCorpus) -> Result<EvaluationReport, PipelineError> {
    let mut charts = Vec::new();
    for chart in &corpus.charts {
        let mut human_patterns: Vec<Vec<String>> = Vec::new();
        for a in corpus.annotations_for(&chart.id) {
            let set: Vec<String> = a.element_ids.iter().cloned().collect();
            if !human_patterns.contains(&set) {
                human_patterns.push(set);
            }
        }
        if human_patterns.is_empty() {
            continue;
        }
        let k = human_patterns.len();
        let model_groups: Vec<Vec<String>> = match assess::<&str>(model, &chart.document, &[], 0) {
            Ok(report) => report
                .patterns
                .into_iter()
                .take(k)
                .map(|p| p.group.element_ids.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
                .collect(),
            Err(PipelineError::Patterns(PatternError::TooFewElements)) => Vec::new(),
            Err(e) => return Err(e),
        };
        let (scores, empty) = if model_groups.is_empty() {
            (Scores { ega: 0.0, pcr: 0.0, ac: 0.0 }, true)
        } else {
            (
                Scores {
                    ega: ega(&model_groups, &human_patterns).expect("both lists nonempty"),
                    pcr: pcr(&model_groups, &human_patterns).expect("both lists nonempty"),
                    ac: ac(&model_groups, &human_patterns),
                },
                false,
            )
        };
        charts.push(ChartEvaluation {
            chart_id: chart.id.clone(),
            k,
            ega: scores.ega,
            pcr: scores.pcr,
            ac: scores.ac,
            no_model_groups: empty,
            model_groups,
            human_patterns,
        });
    }
    let overall = summarize_scores(&charts);
    Ok(EvaluationReport { charts, overall })
}

fn summarize_scores(charts: &[ChartEvaluation]) -> MetricSummary {
    let stats = |f: fn(&ChartEvaluation) -> f64| -> (f64, f64) {
        if charts.is_empty() {
            return (0.0, 0.0);
        }
        let n = charts.len() as f64;
        let mean = charts.iter().map(f).sum::<f64>() / n;
        let var = charts.iter().map(|c| (f(c) - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (em, es) = stats(|c| c.ega);
    let (pm, ps) = stats(|c| c.pcr);
    let (am, as_) = stats(|c| c.ac);
    MetricSummary {
        mean: Scores { ega: em, pcr: pm, ac: am },
        std: Scores { ega: es, pcr: ps, ac: as_ },
    }
}
