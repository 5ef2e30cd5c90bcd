//! Human pattern annotations and the contrastive element pairs derived from them.

use crate::chart::{parse_chart, ChartDocument, ChartError};
use crate::effects::{extract_features, ChartFeatureTable, FeatureError};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

pub const TOP_RATING: u8 = 5;
/// Kernel bandwidth as a fraction of the canvas diagonal.
pub const SIGMA_FRACTION: f64 = 0.15;

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("corpus JSON: {0}")]
    Json(String),
    #[error("chart `{chart}`: {source}")]
    Chart { chart: String, source: ChartError },
    #[error("chart `{chart}`: {source}")]
    Features { chart: String, source: FeatureError },
    #[error("duplicate chart id `{0}`")]
    DuplicateChart(String),
    #[error("annotation references unknown chart `{0}`")]
    UnknownChart(String),
    #[error("annotation on `{chart}` references unknown element `{element}`")]
    UnknownElement { chart: String, element: String },
    #[error("annotation on `{0}` has no elements")]
    EmptyGroup(String),
    #[error("annotation on `{chart}`: rating {value} outside 1..=5")]
    RatingOutOfRange { chart: String, value: u8 },
    #[error("no feature table for chart `{0}`")]
    MissingFeatures(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternAnnotation {
    pub chart_id: String,
    pub annotator_id: String,
    pub element_ids: BTreeSet<String>,
    pub consistency_rating: u8,
    pub distinctness_rating: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusChart {
    pub id: String,
    /// Path as written in the corpus file, relative to it.
    pub svg_path: PathBuf,
    pub document: ChartDocument,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationCorpus {
    pub charts: Vec<CorpusChart>,
    pub annotations: Vec<PatternAnnotation>,
    pub rng_seed: u64,
}

/// On-disk corpus layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub seed: u64,
    pub charts: Vec<CorpusFileChart>,
    pub annotations: Vec<CorpusFileAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFileChart {
    pub id: String,
    pub svg_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFileAnnotation {
    pub chart: String,
    pub annotator: String,
    pub elements: Vec<String>,
    pub consistency: u8,
    pub distinctness: u8,
}

impl AnnotationCorpus {
    /// Build a corpus from already-parsed charts, validating every annotation.
    pub fn new(
        charts: Vec<CorpusChart>,
        annotations: Vec<PatternAnnotation>,
        rng_seed: u64,
    ) -> Result<Self, AnnotationError> {
        let mut seen = HashSet::new();
        for c in &charts {
            if !seen.insert(c.id.as_str()) {
                return Err(AnnotationError::DuplicateChart(c.id.clone()));
            }
        }
        let corpus = AnnotationCorpus {
            charts,
            annotations,
            rng_seed,
        };
        for a in &corpus.annotations {
            let chart = corpus
                .chart(&a.chart_id)
                .ok_or_else(|| AnnotationError::UnknownChart(a.chart_id.clone()))?;
            if a.element_ids.is_empty() {
                return Err(AnnotationError::EmptyGroup(a.chart_id.clone()));
            }
            for rating in [a.consistency_rating, a.distinctness_rating] {
                if !(1..=TOP_RATING).contains(&rating) {
                    return Err(AnnotationError::RatingOutOfRange {
                        chart: a.chart_id.clone(),
                        value: rating,
                    });
                }
            }
            if let Some(missing) = a.element_ids.iter().find(|id| chart.document.element(id).is_none()) {
                return Err(AnnotationError::UnknownElement {
                    chart: a.chart_id.clone(),
                    element: missing.clone(),
                });
            }
        }
        Ok(corpus)
    }

    pub fn chart(&self, id: &str) -> Option<&CorpusChart> {
        self.charts.iter().find(|c| c.id == id)
    }

    pub fn annotations_for<'a>(&'a self, chart_id: &'a str) -> impl Iterator<Item = &'a PatternAnnotation> + 'a {
        self.annotations.iter().filter(move |a| a.chart_id == chart_id)
    }

    /// Full-chart feature tables keyed by chart id.
    pub fn feature_tables(&self) -> Result<HashMap<String, ChartFeatureTable>, AnnotationError> {
        self.charts
            .iter()
            .map(|c| {
                extract_features(&c.document)
                    .map(|t| (c.id.clone(), t))
                    .map_err(|source| AnnotationError::Features {
                        chart: c.id.clone(),
                        source,
                    })
            })
            .collect()
    }

    /// Keep only the given charts and their annotations.
    pub fn subset(&self, chart_ids: &[String]) -> AnnotationCorpus {
        let keep: HashSet<&str> = chart_ids.iter().map(String::as_str).collect();
        AnnotationCorpus {
            charts: self
                .charts
                .iter()
                .filter(|c| keep.contains(c.id.as_str()))
                .cloned()
                .collect(),
            annotations: self
                .annotations
                .iter()
                .filter(|a| keep.contains(a.chart_id.as_str()))
                .cloned()
                .collect(),
            rng_seed: self.rng_seed,
        }
    }

    pub fn to_file(&self) -> CorpusFile {
        CorpusFile {
            seed: self.rng_seed,
            charts: self
                .charts
                .iter()
                .map(|c| CorpusFileChart {
                    id: c.id.clone(),
                    svg_path: c.svg_path.to_string_lossy().into_owned(),
                })
                .collect(),
            annotations: self
                .annotations
                .iter()
                .map(|a| CorpusFileAnnotation {
                    chart: a.chart_id.clone(),
                    annotator: a.annotator_id.clone(),
                    elements: a.element_ids.iter().cloned().collect(),
                    consistency: a.consistency_rating,
                    distinctness: a.distinctness_rating,
                })
                .collect(),
        }
    }
}

/// Parse corpus JSON; chart paths resolve against `base_dir`.
pub fn parse_corpus(json: &str, base_dir: &Path) -> Result<AnnotationCorpus, AnnotationError> {
    let file: CorpusFile = serde_json::from_str(json).map_err(|e| AnnotationError::Json(e.to_string()))?;
    let mut charts = Vec::with_capacity(file.charts.len());
    for c in file.charts {
        let path = base_dir.join(&c.svg_path);
        let text = std::fs::read_to_string(&path).map_err(|e| AnnotationError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let document = parse_chart(&text).map_err(|source| AnnotationError::Chart {
            chart: c.id.clone(),
            source,
        })?;
        charts.push(CorpusChart {
            id: c.id,
            svg_path: PathBuf::from(c.svg_path),
            document,
        });
    }
    let annotations = file
        .annotations
        .into_iter()
        .map(|a| PatternAnnotation {
            chart_id: a.chart,
            annotator_id: a.annotator,
            element_ids: a.elements.into_iter().collect(),
            consistency_rating: a.consistency,
            distinctness_rating: a.distinctness,
        })
        .collect();
    AnnotationCorpus::new(charts, annotations, file.seed)
}

pub fn load_corpus(path: &Path) -> Result<AnnotationCorpus, AnnotationError> {
    let json = std::fs::read_to_string(path).map_err(|e| AnnotationError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_corpus(&json, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrainingPair {
    pub chart_id: String,
    pub element_a: String,
    pub element_b: String,
    pub polarity: Polarity,
}

/// All within-group pairs of top-consistency annotations, deduplicated per chart.
/// Within a pair, `element_a` precedes `element_b` in document order.
pub fn extract_positive_pairs(corpus: &AnnotationCorpus) -> Vec<TrainingPair> {
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for a in corpus.annotations.iter().filter(|a| a.consistency_rating == TOP_RATING) {
        let Some(chart) = corpus.chart(&a.chart_id) else {
            continue;
        };
        let mut members: Vec<(usize, &str)> = a
            .element_ids
            .iter()
            .filter_map(|id| chart.document.index_of(id).map(|i| (i, id.as_str())))
            .collect();
        members.sort_unstable();
        for (x, &(_, first)) in members.iter().enumerate() {
            for &(_, second) in &members[x + 1..] {
                if seen.insert((a.chart_id.as_str(), first, second)) {
                    pairs.push(TrainingPair {
                        chart_id: a.chart_id.clone(),
                        element_a: first.to_string(),
                        element_b: second.to_string(),
                        polarity: Polarity::Positive,
                    });
                }
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NegativeSample {
    /// `element_a` is inside the annotated group, `element_b` outside.
    pub pairs: Vec<TrainingPair>,
    pub warnings: Vec<String>,
}

/// Normalised Gaussian-kernel sampling probabilities for candidates at the
/// given distances.
pub fn kernel_probabilities(distances: &[f64], sigma: f64) -> Vec<f64> {
    let weights: Vec<f64> = distances
        .iter()
        .map(|d| (-(d * d) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / distances.len() as f64; distances.len()]
    }
}

/// Per-chart generator: the corpus seed picks the key, the chart id the stream,
/// so each chart's draws are independent of every other chart.
pub fn chart_rng(seed: u64, chart_id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(chart_id.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// For each annotation and each member `e`: `distinctness` outside elements
/// drawn without replacement with kernel weights on centroid distance, plus
/// every outside contact neighbour of `e`. Deduplicated per chart.
pub fn sample_negative_pairs(
    corpus: &AnnotationCorpus,
    features: &HashMap<String, ChartFeatureTable>,
    seed: u64,
) -> Result<NegativeSample, AnnotationError> {
    let mut out = NegativeSample::default();
    let mut rngs: HashMap<&str, ChaCha8Rng> = HashMap::new();
    let mut seen = HashSet::new();

    for a in &corpus.annotations {
        let table = features
            .get(&a.chart_id)
            .ok_or_else(|| AnnotationError::MissingFeatures(a.chart_id.clone()))?;
        let mut inside = Vec::new();
        for id in &a.element_ids {
            let i = table.index_of(id).ok_or_else(|| AnnotationError::UnknownElement {
                chart: a.chart_id.clone(),
                element: id.clone(),
            })?;
            inside.push(i);
        }
        inside.sort_unstable();
        let outside: Vec<usize> = (0..table.len()).filter(|i| inside.binary_search(i).is_err()).collect();
        if outside.is_empty() {
            out.warnings.push(format!(
                "annotation by `{}` on `{}` covers every element; no negatives sampled",
                a.annotator_id, a.chart_id
            ));
            continue;
        }

        let rng = rngs
            .entry(a.chart_id.as_str())
            .or_insert_with(|| chart_rng(seed, &a.chart_id));
        let sigma = SIGMA_FRACTION * table.canvas_diagonal();
        let amount = usize::from(a.distinctness_rating);
        for &e in &inside {
            let anchor = table.centroids[e];
            let distances: Vec<f64> = outside.iter().map(|&x| anchor.distance(&table.centroids[x])).collect();
            let probs = kernel_probabilities(&distances, sigma);
            let slots: Vec<usize> = (0..outside.len()).collect();
            let mut chosen: Vec<usize> = slots
                .choose_multiple_weighted(rng, amount, |&k| probs[k].max(f64::MIN_POSITIVE))
                .expect("kernel weights are finite and positive")
                .map(|&k| outside[k])
                .collect();
            chosen.sort_unstable();
            chosen.extend(table.relations.contact_neighbors(e).filter(|x| inside.binary_search(x).is_err()));

            for x in chosen {
                let key = (a.chart_id.clone(), e.min(x), e.max(x));
                if seen.insert(key) {
                    out.pairs.push(TrainingPair {
                        chart_id: a.chart_id.clone(),
                        element_a: table.element_ids[e].clone(),
                        element_b: table.element_ids[x].clone(),
                        polarity: Polarity::Negative,
                    });
                }
            }
        }
    }
    Ok(out)
}
