use crate::annotations::{AnnotationCorpus, CorpusChart, PatternAnnotation, TOP_RATING};
use crate::chart::parse_chart;
use crate::color::{hsl_to_rgb, Hsl};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const PLOT_LEFT: f64 = 30.0;
const PLOT_RIGHT: f64 = 470.0;
const PLOT_TOP: f64 = 20.0;
const BASELINE: f64 = 290.0;
const PLANTED_DISTINCTNESS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingChannel {
    FillHue,
    BboxTop,
    Size,
}

/// A fixed count or an inclusive `[lo, hi]` range drawn per use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Fixed(usize),
    Range([usize; 2]),
}

impl Count {
    fn draw(self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Count::Fixed(n) => n.max(1),
            Count::Range([lo, hi]) => rng.random_range(lo.max(1)..=hi.max(lo).max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n_charts: usize,
    pub groups_per_chart: Count,
    pub elements_per_group: Count,
    pub grouping_channel: GroupingChannel,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub corpus: AnnotationCorpus,
    /// Chart sources keyed by their path relative to the corpus file.
    pub svgs: Vec<(PathBuf, String)>,
}

impl PlantedCorpus {
    pub fn corpus_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.corpus.to_file()).expect("corpus serialises");
        s.push('\n');
        s
    }

    /// Write `corpus.json` and the SVGs under `dir`; returns the corpus path.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        for (rel, text) in &self.svgs {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        let corpus = dir.join("corpus.json");
        std::fs::write(&corpus, self.corpus_json())?;
        Ok(corpus)
    }
}

struct Mark {
    id: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    circle: bool,
    fill: Hsl,
}

/// Synthetic charts whose elements form groups that agree on one channel
/// and vary randomly on the others, annotated with the planted partition.
pub fn generate_planted_corpus(config: &PlantedConfig) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut charts = Vec::new();
    let mut annotations = Vec::new();
    let mut svgs = Vec::new();

    for c in 0..config.n_charts {
        let id = format!("chart_{c:02}");
        let n_groups = config.groups_per_chart.draw(&mut rng);
        let sizes: Vec<usize> = (0..n_groups).map(|_| config.elements_per_group.draw(&mut rng)).collect();
        let mut membership: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &n)| std::iter::repeat_n(g, n)).collect();
        membership.shuffle(&mut rng);

        let marks = match config.grouping_channel {
            GroupingChannel::FillHue => hue_marks(&membership, n_groups, c % 2 == 1, &mut rng),
            GroupingChannel::BboxTop => top_marks(&membership, n_groups, &mut rng),
            GroupingChannel::Size => size_marks(&membership, n_groups, &mut rng),
        };
        let svg = render(&marks);
        let rel = PathBuf::from(format!("svg/{id}.svg"));
        let document = parse_chart(&svg).expect("generated SVG parses");
        for g in 0..n_groups {
            annotations.push(PatternAnnotation {
                chart_id: id.clone(),
                annotator_id: "planted".into(),
                element_ids: marks
                    .iter()
                    .zip(&membership)
                    .filter(|(_, &m)| m == g)
                    .map(|(mark, _)| mark.id.clone())
                    .collect(),
                consistency_rating: TOP_RATING,
                distinctness_rating: PLANTED_DISTINCTNESS,
            });
        }
        charts.push(CorpusChart {
            id,
            svg_path: rel.clone(),
            document,
        });
        svgs.push((rel, svg));
    }
    let corpus = AnnotationCorpus::new(charts, annotations, config.seed).expect("planted annotations are valid");
    PlantedCorpus { corpus, svgs }
}

fn random_color(rng: &mut ChaCha8Rng, hue: f64) -> Hsl {
    Hsl {
        h: hue.rem_euclid(360.0),
        s: rng.random_range(0.55..0.85),
        l: rng.random_range(0.40..0.60),
    }
}

fn group_hues(n_groups: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base = rng.random_range(0.0..360.0);
    (0..n_groups).map(|g| base + 360.0 * g as f64 / n_groups as f64).collect()
}

fn hue_marks(membership: &[usize], n_groups: usize, scatter: bool, rng: &mut ChaCha8Rng) -> Vec<Mark> {
    let hues = group_hues(n_groups, rng);
    let slot = (PLOT_RIGHT - PLOT_LEFT) / membership.len() as f64;
    membership
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let jitter = rng.random_range(-8.0..8.0);
            let fill = random_color(rng, hues[g] + jitter);
            if scatter {
                let r = rng.random_range(4.0..10.0);
                Mark {
                    id: format!("e{k}"),
                    x: rng.random_range(PLOT_LEFT + r..PLOT_RIGHT - r),
                    y: rng.random_range(PLOT_TOP + r..BASELINE - r),
                    w: r,
                    h: r,
                    circle: true,
                    fill,
                }
            } else {
                let h = rng.random_range(40.0..BASELINE - PLOT_TOP);
                Mark {
                    id: format!("e{k}"),
                    x: PLOT_LEFT + k as f64 * slot + 0.15 * slot,
                    y: BASELINE - h,
                    w: 0.7 * slot,
                    h,
                    circle: false,
                    fill,
                }
            }
        })
        .collect()
}

fn top_marks(membership: &[usize], n_groups: usize, rng: &mut ChaCha8Rng) -> Vec<Mark> {
    let band = (BASELINE - PLOT_TOP - 80.0) / n_groups as f64;
    let tops: Vec<f64> = (0..n_groups).map(|g| PLOT_TOP + band * g as f64 + 0.5 * band).collect();
    let slot = (PLOT_RIGHT - PLOT_LEFT) / membership.len() as f64;
    membership
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let hue = rng.random_range(0.0..360.0);
            Mark {
                id: format!("e{k}"),
                x: PLOT_LEFT + k as f64 * slot + 0.15 * slot,
                y: tops[g],
                w: 0.7 * slot,
                h: rng.random_range(20.0..70.0),
                circle: false,
                fill: random_color(rng, hue),
            }
        })
        .collect()
}

fn size_marks(membership: &[usize], n_groups: usize, rng: &mut ChaCha8Rng) -> Vec<Mark> {
    let sides: Vec<f64> = (0..n_groups).map(|g| 8.0 + 14.0 * g as f64).collect();
    membership
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let side = sides[g];
            let hue = rng.random_range(0.0..360.0);
            Mark {
                id: format!("e{k}"),
                x: rng.random_range(PLOT_LEFT..PLOT_RIGHT - side),
                y: rng.random_range(PLOT_TOP..BASELINE - side),
                w: side,
                h: side,
                circle: false,
                fill: random_color(rng, hue),
            }
        })
        .collect()
}

fn render(marks: &[Mark]) -> String {
    let mut svg = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">"#);
    svg.push('\n');
    svg.push_str(&format!(
        r##"  <line id="axis" x1="{PLOT_LEFT}" y1="{BASELINE}" x2="{PLOT_RIGHT}" y2="{BASELINE}" stroke="#333333" stroke-width="1"/>"##
    ));
    svg.push('\n');
    for m in marks {
        let fill = hsl_to_rgb(m.fill);
        if m.circle {
            svg.push_str(&format!(
                r#"  <circle id="{}" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{fill}"/>"#,
                m.id, m.x, m.y, m.w
            ));
        } else {
            svg.push_str(&format!(
                r#"  <rect id="{}" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                m.id, m.x, m.y, m.w, m.h
            ));
        }
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}
