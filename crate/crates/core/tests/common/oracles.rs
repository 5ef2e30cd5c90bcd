// Independent transcriptions used as test oracles. Nothing here calls into
// the library's scoring code; it only reads parameters and feature vectors.
#![allow(dead_code)]

use psight_core::effects::EffectVector;
use psight_core::model::{ModelConfig, PerceptionModel};

/// Seeded parameters spread out so perceptual weights vary across dims.
pub fn fixture_model() -> PerceptionModel {
    let config = ModelConfig {
        seed: 2024,
        ..ModelConfig::default()
    };
    let mut model = PerceptionModel::initialize(&config).unwrap();
    for v in model.params.wh.iter_mut().chain(model.params.bh.iter_mut()) {
        *v *= 15.0;
    }
    for v in model.params.w1.iter_mut() {
        *v *= 5.0;
    }
    model
}

pub const SALIENCE_CHARTS: [&str; 10] = [
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="100" height="100">
  <rect id="a" x="10" y="10" width="20" height="40" fill="#d62728"/>
  <rect id="b" x="40" y="20" width="20" height="30" fill="#1f77b4"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="200" height="100">
  <rect id="a" x="10" y="50" width="20" height="50" fill="#d62728"/>
  <rect id="b" x="40" y="30" width="20" height="70" fill="#d62728"/>
  <rect id="c" x="70" y="60" width="20" height="40" fill="#1f77b4"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="200" height="150">
  <circle id="a" cx="30" cy="40" r="6" fill="#2ca02c"/>
  <circle id="b" cx="60" cy="90" r="6" fill="#2ca02c" stroke="#000" stroke-width="2"/>
  <circle id="c" cx="120" cy="50" r="9" fill="#ff7f0e"/>
  <circle id="d" cx="160" cy="110" r="4" fill="#9467bd"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="240" height="160">
  <rect id="a" x="20" y="40" width="30" height="100" fill="steelblue"/>
  <rect id="b" x="60" y="80" width="30" height="60" fill="steelblue"/>
  <rect id="c" x="100" y="20" width="30" height="120" fill="orange"/>
  <rect id="d" x="140" y="100" width="30" height="40" fill="orange"/>
  <line id="e" x1="10" y1="140" x2="230" y2="140" stroke="#333" stroke-width="1"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="300" height="200">
  <path id="a" d="M 10 150 L 60 100 L 110 120 L 160 60" fill="none" stroke="#e377c2" stroke-width="2"/>
  <path id="b" d="M 10 170 L 60 140 L 110 150 L 160 110" fill="none" stroke="#17becf" stroke-width="2"/>
  <circle id="c" cx="160" cy="60" r="5" fill="#e377c2"/>
  <circle id="d" cx="160" cy="110" r="5" fill="#17becf"/>
  <text id="e" x="200" y="60" font-size="12" fill="#e377c2">alpha</text>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="200" height="200">
  <rect id="frame" x="10" y="10" width="180" height="180" fill="#f5f5f5" stroke="#999"/>
  <rect id="a" x="30" y="30" width="20" height="20" fill="#8c564b"/>
  <rect id="b" x="60" y="30" width="20" height="20" fill="#8c564b"/>
  <rect id="c" x="30" y="120" width="20" height="20" fill="#bcbd22"/>
  <rect id="d" x="120" y="120" width="40" height="40" fill="#bcbd22" opacity="0.5"/>
  <ellipse id="e" cx="140" cy="50" rx="20" ry="10" fill="#7f7f7f"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="120" height="120">
  <g transform="translate(10,10)">
    <rect id="a" x="0" y="0" width="10" height="10" fill="hsl(0,80%,50%)"/>
    <rect id="b" x="12" y="0" width="10" height="10" fill="hsl(10,80%,50%)"/>
    <rect id="c" x="24" y="0" width="10" height="10" fill="hsl(200,80%,50%)"/>
  </g>
  <polygon id="d" points="60,60 100,60 80,100" fill="hsl(210,60%,40%)"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="400" height="300">
  <rect id="a" x="40" y="100" width="38" height="150" fill="#4682b4"/>
  <rect id="b" x="80" y="150" width="38" height="100" fill="#4682b4"/>
  <rect id="c" x="120" y="60" width="38" height="190" fill="rgba(255,0,0,0.5)"/>
  <rect id="d" x="200" y="120" width="38" height="130" fill="#2ca02c" stroke="black" stroke-width="2"/>
  <rect id="e" x="240" y="200" width="38" height="50" fill="#2ca02c"/>
  <rect id="f" x="320" y="90" width="38" height="160" fill="#ff7f0e"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="160" height="160">
  <circle id="a" cx="40" cy="40" r="10" fill="none" stroke="#d62728" stroke-width="3"/>
  <circle id="b" cx="80" cy="40" r="10" fill="none" stroke="#d62728" stroke-width="1"/>
  <circle id="c" cx="40" cy="100" r="10" fill="#d62728"/>
  <circle id="d" cx="80" cy="100" r="14" fill="#1f77b4"/>
  <circle id="e" cx="120" cy="100" r="14" fill="#1f77b4"/>
  <circle id="f" cx="120" cy="40" r="6" fill="#aec7e8"/>
</svg>"##,
    r##"<svg xmlns="http://www.w3.org/2000/svg" width="300" height="120">
  <polyline id="a" points="10,100 50,60 90,80" fill="none" stroke="#000" stroke-width="1.5"/>
  <polyline id="b" points="110,100 150,60 190,80" fill="none" stroke="#000" stroke-width="1.5"/>
  <rect id="c" x="210" y="20" width="80" height="30" fill="#ffffff" stroke="#000"/>
  <text id="d" x="220" y="40" font-size="10" fill="#000">legend</text>
</svg>"##,
];

/// Perceptual weights straight from the logistic head.
fn weights(model: &PerceptionModel, x: &[f64]) -> Vec<f64> {
    let n = model.config.input_dim;
    let p = &model.params;
    (0..n)
        .map(|r| {
            let mut z = p.bh[r];
            for k in 0..n {
                z += p.wh[r * n + k] * x[k];
            }
            1.0 / (1.0 + (-z).exp())
        })
        .collect()
}

fn masked(v: &EffectVector) -> Vec<f64> {
    v.values
        .iter()
        .zip(v.presence_mask.iter())
        .map(|(x, &present)| if present { *x } else { 0.0 })
        .collect()
}

/// C(i, j): cosine of the weighted effect vectors.
pub fn brute_consistency(model: &PerceptionModel, vi: &EffectVector, vj: &EffectVector) -> f64 {
    let (xi, xj) = (masked(vi), masked(vj));
    let (wi, wj) = (weights(model, &xi), weights(model, &xj));
    let ui: Vec<f64> = (0..xi.len()).map(|d| wi[d].abs() * xi[d]).collect();
    let uj: Vec<f64> = (0..xj.len()).map(|d| wj[d].abs() * xj[d]).collect();
    let mut dot = 0.0;
    let mut ni = 0.0;
    let mut nj = 0.0;
    for d in 0..ui.len() {
        dot += ui[d] * uj[d];
        ni += ui[d] * ui[d];
        nj += uj[d] * uj[d];
    }
    if ni.sqrt() < 1e-12 || nj.sqrt() < 1e-12 {
        return 0.0;
    }
    dot / (ni.sqrt() * nj.sqrt())
}

/// `(intra_avg, inter_avg, ratio, display)` for the group given as a bitmask
/// over the chart's rows; the group must leave at least one row outside.
pub fn brute_salience(model: &PerceptionModel, vectors: &[EffectVector], mask: u32) -> (f64, f64, f64, f64) {
    let n = vectors.len();
    let inside = |i: usize| mask & (1 << i) != 0;
    let mut intra_sum = 0.0;
    let mut intra_n = 0;
    let mut inter_sum = 0.0;
    let mut inter_n = 0;
    for i in 0..n {
        for j in 0..n {
            if !inside(i) {
                continue;
            }
            if inside(j) && j > i {
                intra_sum += brute_consistency(model, &vectors[i], &vectors[j]);
                intra_n += 1;
            } else if !inside(j) {
                inter_sum += brute_consistency(model, &vectors[i], &vectors[j]);
                inter_n += 1;
            }
        }
    }
    let intra = if intra_n == 0 { 1.0 } else { intra_sum / intra_n as f64 };
    let inter = inter_sum / inter_n as f64;
    let ratio = intra / if inter > 1e-9 { inter } else { 1e-9 };
    (intra, inter, ratio, 100.0 * ratio / (1.0 + ratio))
}

pub struct MetricCase {
    pub name: &'static str,
    pub model: Vec<&'static str>,
    pub human: Vec<&'static str>,
    pub ega: f64,
    pub pcr: f64,
    pub ac: f64,
}

/// Groups are strings of one-letter element ids. Expected values computed by hand.
pub fn metric_cases() -> Vec<MetricCase> {
    let s3 = 3f64.sqrt();
    let case = |name, model: &[&'static str], human: &[&'static str], ega, pcr, ac| MetricCase {
        name,
        model: model.to_vec(),
        human: human.to_vec(),
        ega,
        pcr,
        ac,
    };
    vec![
        case("exact single", &["ab"], &["ab"], 1.0, 1.0, 1.0),
        case("split model group", &["ab", "c"], &["abc"], 0.5, 2.0 / 3.0, 1.0 / s3),
        case("one human missed", &["ab"], &["ab", "cd"], 1.0, 0.5, 1.0 / 2f64.sqrt()),
        case("identical lists", &["ab", "cd"], &["ab", "cd"], 1.0, 1.0, 1.0),
        case("disjoint supports", &["ab"], &["cd"], 0.0, 0.0, 0.0),
        case("two overlapping pairs", &["ab", "bc"], &["abc"], 2.0 / 3.0, 2.0 / 3.0, 2.0 / 6f64.sqrt()),
        case("merged humans", &["abcd"], &["ab", "cd"], 0.5, 0.5, 1.0 / s3),
        case("shifted boundary", &["abc", "de"], &["ab", "cde"], 2.0 / 3.0, 2.0 / 3.0, 0.5),
        case("duplicate model group", &["ab", "ab"], &["ab"], 1.0, 1.0, 1.0),
        case("triangle of pairs", &["ab", "bc", "ac"], &["abc"], 2.0 / 3.0, 2.0 / 3.0, 1.0),
        case("singleton model group", &["a"], &["ab"], 0.5, 0.5, 0.0),
        case("five of six", &["abcde"], &["abcdef"], 5.0 / 6.0, 5.0 / 6.0, (2.0f64 / 3.0).sqrt()),
        case("three model pairs", &["ab", "cd", "ef"], &["abc"], 11.0 / 36.0, 2.0 / 3.0, 1.0 / 3.0),
        case("extra human pattern", &["abc"], &["abc", "cd"], 1.0, 5.0 / 8.0, s3 / 2.0),
    ]
}

pub fn letters(groups: &[&str]) -> Vec<Vec<char>> {
    groups.iter().map(|g| g.chars().collect()).collect()
}
