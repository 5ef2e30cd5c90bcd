use super::{conflicts, usage_from_table, AdvisorError, ConflictRule, DimensionUsage, HIGH_VARIANCE};
use crate::chart::{apply_edit, AnnotationMark, BoundingBox, ChartDocument, EditCommand, ElementKind, GraphicalElement, Geometry, Point};
use crate::color::{hsl_to_rgb, rgb_to_hsl, Hsl, Rgb};
use crate::effects::{extract_features_scoped, ChartFeatureTable, Dim};
use crate::model::PerceptionModel;
use crate::patterns::{ChartScorer, SalienceScore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;

const HUE_GRID: [f64; 3] = [0.0, 120.0, 240.0];
const LEVEL_GRID: [f64; 3] = [0.25, 0.5, 0.75];
const STROKE_WIDTH_GRID: [f64; 3] = [1.0, 2.0, 3.0];
/// Multiples of the group's median size.
const SIZE_GRID: [f64; 2] = [0.5, 1.5];
const ADDED_STROKE_WIDTH: &str = "2";
const DEFAULT_STROKE: Rgb = Rgb::new(51, 51, 51);
const ANNOTATION_STROKE: &str = "rgb(214,39,40)";
const ANNOTATION_WIDTH: f64 = 2.0;
const OUTLINE_PADDING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    AddDimension,
    ModifyEffect,
    AddAnnotation,
}

/// An editable visual channel and the effect dimensions it drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    FillHue,
    FillSaturation,
    FillLightness,
    StrokeHue,
    StrokeSaturation,
    StrokeLightness,
    StrokeWidth,
    BboxWidth,
    BboxHeight,
}

impl Channel {
    pub const ALL: [Channel; 9] = [
        Channel::FillHue,
        Channel::FillSaturation,
        Channel::FillLightness,
        Channel::StrokeHue,
        Channel::StrokeSaturation,
        Channel::StrokeLightness,
        Channel::StrokeWidth,
        Channel::BboxWidth,
        Channel::BboxHeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::FillHue => "fill_hue",
            Channel::FillSaturation => "fill_saturation",
            Channel::FillLightness => "fill_lightness",
            Channel::StrokeHue => "stroke_hue",
            Channel::StrokeSaturation => "stroke_saturation",
            Channel::StrokeLightness => "stroke_lightness",
            Channel::StrokeWidth => "stroke_width",
            Channel::BboxWidth => "bbox_width",
            Channel::BboxHeight => "bbox_height",
        }
    }

    pub fn dims(self) -> &'static [Dim] {
        match self {
            Channel::FillHue => &[Dim::FillHueSin, Dim::FillHueCos],
            Channel::FillSaturation => &[Dim::FillSaturation],
            Channel::FillLightness => &[Dim::FillLightness],
            Channel::StrokeHue => &[Dim::StrokeHueSin, Dim::StrokeHueCos],
            Channel::StrokeSaturation => &[Dim::StrokeSaturation],
            Channel::StrokeLightness => &[Dim::StrokeLightness],
            Channel::StrokeWidth => &[Dim::StrokeWidth],
            Channel::BboxWidth => &[Dim::BboxWidth],
            Channel::BboxHeight => &[Dim::BboxHeight],
        }
    }

    fn is_fill(self) -> bool {
        matches!(self, Channel::FillHue | Channel::FillSaturation | Channel::FillLightness)
    }

    fn is_stroke_color(self) -> bool {
        matches!(self, Channel::StrokeHue | Channel::StrokeSaturation | Channel::StrokeLightness)
    }

    fn grid(self) -> &'static [f64] {
        match self {
            Channel::FillHue | Channel::StrokeHue => &HUE_GRID,
            Channel::StrokeWidth => &STROKE_WIDTH_GRID,
            Channel::BboxWidth | Channel::BboxHeight => &SIZE_GRID,
            _ => &LEVEL_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: String,
    pub kind: SuggestionKind,
    pub target_group: Vec<String>,
    /// Absent for annotations.
    pub dim: Option<Channel>,
    /// The literal written into the chart, or the annotation shape.
    pub value: String,
    pub code_expression: String,
    /// Change in display salience when the edit is applied.
    pub gain: f64,
    pub salience_before: f64,
    pub salience_after: f64,
    pub edit_command: EditCommand,
    pub conflicts_checked: bool,
    /// Digest of the document the suggestion was simulated against.
    pub base_digest: String,
}

struct Candidate {
    kind: SuggestionKind,
    channel: Option<Channel>,
    value: String,
    code_expression: String,
    edit: EditCommand,
}

/// Simulated suggestions for `group`: unused channels first tried on a value
/// grid, then in-use channels that are low-diversity or inconsistent inside
/// the group, each kept only when re-scoring the edited chart raises salience.
/// One surrounding or connecting annotation is always appended.
pub fn generate_suggestions<S: AsRef<str>, G: AsRef<str>>(
    model: &PerceptionModel,
    doc: &ChartDocument,
    excluded: &[S],
    group: &[G],
) -> Result<Vec<Suggestion>, AdvisorError> {
    let table = extract_features_scoped(doc, excluded)?;
    let scorer = ChartScorer::new(model, &table)?;
    let members = scorer.indices(group)?;
    let before = scorer.salience_of(&members)?;
    let group_ids: Vec<String> = members.iter().map(|&i| table.element_ids[i].clone()).collect();
    let elements: Vec<&GraphicalElement> = group_ids.iter().filter_map(|id| doc.element(id)).collect();
    let usage = usage_from_table(&table, &(0..table.len()).collect::<Vec<_>>());
    let rules = ConflictRule::builtin();

    let mut candidates = Vec::new();
    let mut seen = HashSet::new();
    for channel in Channel::ALL {
        for c in channel_candidates(channel, doc, &table, &members, &elements, &usage, &rules) {
            if seen.insert((channel, c.value.clone())) {
                candidates.push(c);
            }
        }
    }

    let digest = doc.digest();
    let mut ranked = Vec::new();
    for c in candidates {
        let s = simulate(model, doc, excluded, &group_ids, &before, c, &digest)?;
        if s.gain > 0.0 {
            ranked.push(s);
        }
    }
    ranked.sort_by(|a, b| {
        b.gain
            .total_cmp(&a.gain)
            .then_with(|| a.dim.map(Channel::name).cmp(&b.dim.map(Channel::name)))
            .then_with(|| a.value.cmp(&b.value))
    });

    let annotation = annotation_candidate(&table, &members, &elements);
    ranked.push(simulate(model, doc, excluded, &group_ids, &before, annotation, &digest)?);
    Ok(ranked)
}

/// Apply a suggestion to the document it was generated for.
pub fn apply_suggestion(doc: &ChartDocument, suggestion: &Suggestion) -> Result<ChartDocument, AdvisorError> {
    if doc.digest() != suggestion.base_digest {
        return Err(AdvisorError::StaleSuggestion);
    }
    Ok(apply_edit(doc, &suggestion.edit_command)?)
}

fn simulate<S: AsRef<str>>(
    model: &PerceptionModel,
    doc: &ChartDocument,
    excluded: &[S],
    group: &[String],
    before: &SalienceScore,
    c: Candidate,
    digest: &str,
) -> Result<Suggestion, AdvisorError> {
    let edited = apply_edit(doc, &c.edit)?;
    let after = score(model, &edited, excluded, group)?;
    let id = {
        let key = format!("{digest}|{:?}|{:?}|{}", c.kind, c.channel, c.value);
        Sha256::digest(key.as_bytes()).iter().take(6).map(|b| format!("{b:02x}")).collect()
    };
    Ok(Suggestion {
        id,
        kind: c.kind,
        target_group: group.to_vec(),
        dim: c.channel,
        value: c.value,
        code_expression: c.code_expression,
        gain: after.display - before.display,
        salience_before: before.display,
        salience_after: after.display,
        edit_command: c.edit,
        conflicts_checked: c.kind == SuggestionKind::AddDimension,
        base_digest: digest.to_string(),
    })
}

/// Salience of `group` in `doc` with the same scope exclusions.
pub(crate) fn score<S: AsRef<str>, G: AsRef<str>>(
    model: &PerceptionModel,
    doc: &ChartDocument,
    excluded: &[S],
    group: &[G],
) -> Result<SalienceScore, AdvisorError> {
    let table = extract_features_scoped(doc, excluded)?;
    Ok(ChartScorer::new(model, &table)?.salience(group)?)
}

fn channel_candidates(
    channel: Channel,
    doc: &ChartDocument,
    table: &ChartFeatureTable,
    members: &[usize],
    elements: &[&GraphicalElement],
    usage: &[DimensionUsage],
    rules: &[ConflictRule],
) -> Vec<Candidate> {
    if !applicable(channel, elements, doc) {
        return Vec::new();
    }
    let entries: Vec<&DimensionUsage> = usage.iter().filter(|u| channel.dims().contains(&u.dim)).collect();
    let in_use = entries.iter().any(|u| u.in_use);
    let mut values: Vec<(SuggestionKind, f64)> = Vec::new();
    if !in_use {
        if channel.dims().iter().any(|&d| conflicts(d, usage, rules)) {
            return Vec::new();
        }
        values.extend(channel.grid().iter().map(|&v| (SuggestionKind::AddDimension, v)));
    } else {
        if entries.iter().any(|u| u.low_diversity) {
            values.extend(channel.grid().iter().map(|&v| (SuggestionKind::ModifyEffect, v)));
        }
        if group_variance(table, members, channel) > HIGH_VARIANCE {
            if let Some(v) = group_typical(channel, elements) {
                values.push((SuggestionKind::ModifyEffect, v));
            }
        }
    }
    values
        .into_iter()
        .filter_map(|(kind, v)| build_candidate(channel, kind, v, doc, elements))
        .collect()
}

fn applicable(channel: Channel, elements: &[&GraphicalElement], doc: &ChartDocument) -> bool {
    match channel {
        c if c.is_fill() => elements.iter().all(|e| e.kind != ElementKind::Line && e.style.fill.is_some()),
        Channel::BboxWidth | Channel::BboxHeight => elements.iter().all(|e| {
            axis_aligned_rect(e)
                && local_number(doc, &e.id, size_attribute(channel)).is_some_and(|v| v > 0.0)
        }),
        _ => !elements.is_empty(),
    }
}

fn axis_aligned_rect(e: &GraphicalElement) -> bool {
    match &e.geometry {
        Geometry::Rect { corners } => {
            (corners[0].y - corners[1].y).abs() < 1e-9
                && (corners[1].x - corners[2].x).abs() < 1e-9
                && e.bbox.width() > 0.0
                && e.bbox.height() > 0.0
        }
        _ => false,
    }
}

fn size_attribute(channel: Channel) -> &'static str {
    if channel == Channel::BboxWidth {
        "width"
    } else {
        "height"
    }
}

/// A plain numeric attribute straight from the element's markup.
fn local_number(doc: &ChartDocument, id: &str, attribute: &str) -> Option<f64> {
    let options = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let xml = roxmltree::Document::parse_with_options(&doc.source_text, options).ok()?;
    let node = xml.descendants().find(|n| n.attribute("id") == Some(id))?;
    let raw = node.attribute(attribute)?.trim();
    raw.strip_suffix("px").unwrap_or(raw).trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn group_variance(table: &ChartFeatureTable, members: &[usize], channel: Channel) -> f64 {
    channel
        .dims()
        .iter()
        .map(|dim| {
            let d = dim.index();
            let values: Vec<f64> = members
                .iter()
                .filter(|&&i| table.vectors[i].presence_mask[d])
                .map(|&i| table.vectors[i].values[d])
                .collect();
            if values.is_empty() {
                return 0.0;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max)
}

fn fill_rgb(e: &GraphicalElement) -> Option<Rgb> {
    e.style.fill.map(|c| c.rgb())
}

fn stroke_rgb(e: &GraphicalElement) -> Option<Rgb> {
    e.style.stroke.filter(|_| e.style.stroke_width > 0.0).map(|c| c.rgb())
}

/// Most frequent colour, ties to the first seen.
fn modal_color(colors: impl Iterator<Item = Rgb>) -> Option<Rgb> {
    let mut counts: Vec<(Rgb, usize)> = Vec::new();
    for c in colors {
        match counts.iter_mut().find(|(k, _)| *k == c) {
            Some((_, n)) => *n += 1,
            None => counts.push((c, 1)),
        }
    }
    let best = counts.iter().map(|(_, n)| *n).max()?;
    counts.into_iter().find(|(_, n)| *n == best).map(|(c, _)| c)
}

fn lower_median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values[(values.len() - 1) / 2])
}

fn base_color(channel: Channel, elements: &[&GraphicalElement]) -> Option<Rgb> {
    if channel.is_fill() {
        modal_color(elements.iter().filter_map(|e| fill_rgb(e)))
    } else {
        modal_color(elements.iter().filter_map(|e| stroke_rgb(e)))
    }
}

/// The group's modal or median value on the channel.
fn group_typical(channel: Channel, elements: &[&GraphicalElement]) -> Option<f64> {
    let hsl = |c: Rgb| rgb_to_hsl(c);
    match channel {
        Channel::FillHue | Channel::StrokeHue => base_color(channel, elements).map(|c| hsl(c).h),
        Channel::FillSaturation => lower_median(elements.iter().filter_map(|e| fill_rgb(e)).map(|c| hsl(c).s).collect()),
        Channel::FillLightness => lower_median(elements.iter().filter_map(|e| fill_rgb(e)).map(|c| hsl(c).l).collect()),
        Channel::StrokeSaturation => lower_median(elements.iter().filter_map(|e| stroke_rgb(e)).map(|c| hsl(c).s).collect()),
        Channel::StrokeLightness => lower_median(elements.iter().filter_map(|e| stroke_rgb(e)).map(|c| hsl(c).l).collect()),
        Channel::StrokeWidth => lower_median(
            elements
                .iter()
                .filter(|e| stroke_rgb(e).is_some())
                .map(|e| e.style.stroke_width)
                .collect(),
        ),
        // sizes are expressed as a multiple of the median, so the median itself is 1
        Channel::BboxWidth | Channel::BboxHeight => Some(1.0),
    }
}

fn trim_number(v: f64) -> String {
    let r = (v * 1e4).round() / 1e4;
    format!("{}", r + 0.0)
}

fn set(ids: Vec<String>, attribute: &str, value: String) -> EditCommand {
    EditCommand::SetAttribute {
        ids,
        attribute: attribute.to_string(),
        value,
    }
}

fn batch(mut edits: Vec<EditCommand>) -> EditCommand {
    if edits.len() == 1 {
        edits.remove(0)
    } else {
        EditCommand::Batch { edits }
    }
}

fn build_candidate(
    channel: Channel,
    kind: SuggestionKind,
    v: f64,
    doc: &ChartDocument,
    elements: &[&GraphicalElement],
) -> Option<Candidate> {
    let ids: Vec<String> = elements.iter().map(|e| e.id.clone()).collect();
    if channel.is_fill() || channel.is_stroke_color() {
        let base = base_color(channel, elements).map(rgb_to_hsl).unwrap_or(Hsl {
            h: 0.0,
            s: 0.0,
            l: 0.2,
        });
        let mut hsl = base;
        match channel {
            Channel::FillHue | Channel::StrokeHue => {
                hsl.h = v;
                // a grey base would make the hue invisible
                if hsl.s < 0.05 {
                    hsl.s = 0.75;
                    hsl.l = 0.4;
                }
            }
            Channel::FillSaturation | Channel::StrokeSaturation => hsl.s = v,
            _ => hsl.l = v,
        }
        let literal = hsl_to_rgb(hsl).to_string();
        let attribute = if channel.is_fill() { "fill" } else { "stroke" };
        let mut edits = vec![set(ids, attribute, literal.clone())];
        let mut code = format!("{attribute} → {literal}");
        if channel.is_stroke_color() {
            let bare: Vec<String> = elements.iter().filter(|e| e.style.stroke_width <= 0.0).map(|e| e.id.clone()).collect();
            if !bare.is_empty() {
                edits.push(set(bare, "stroke-width", ADDED_STROKE_WIDTH.to_string()));
                code.push_str(&format!("; stroke-width → {ADDED_STROKE_WIDTH}"));
            }
        }
        return Some(Candidate {
            kind,
            channel: Some(channel),
            value: literal,
            code_expression: code,
            edit: batch(edits),
        });
    }
    match channel {
        Channel::StrokeWidth => {
            let literal = trim_number(v);
            let mut edits = vec![set(ids, "stroke-width", literal.clone())];
            let mut code = format!("stroke-width → {literal}");
            let unpainted: Vec<String> = elements.iter().filter(|e| e.style.stroke.is_none()).map(|e| e.id.clone()).collect();
            if !unpainted.is_empty() {
                let color = base_color(channel, elements).unwrap_or(DEFAULT_STROKE).to_string();
                code.push_str(&format!("; stroke → {color}"));
                edits.push(set(unpainted, "stroke", color));
            }
            Some(Candidate {
                kind,
                channel: Some(channel),
                value: literal,
                code_expression: code,
                edit: batch(edits),
            })
        }
        Channel::BboxWidth | Channel::BboxHeight => {
            let attribute = size_attribute(channel);
            let canvas = |e: &GraphicalElement| {
                if channel == Channel::BboxWidth {
                    e.bbox.width()
                } else {
                    e.bbox.height()
                }
            };
            let target = v * lower_median(elements.iter().map(|e| canvas(e)).collect())?;
            let mut edits = Vec::new();
            for e in elements {
                let local = local_number(doc, &e.id, attribute)?;
                edits.push(set(vec![e.id.clone()], attribute, trim_number(local * target / canvas(e))));
            }
            let literal = trim_number(target);
            Some(Candidate {
                kind,
                channel: Some(channel),
                value: literal.clone(),
                code_expression: format!("{attribute} → {literal}px on canvas"),
                edit: batch(edits),
            })
        }
        _ => None,
    }
}

fn annotation_candidate(table: &ChartFeatureTable, members: &[usize], elements: &[&GraphicalElement]) -> Candidate {
    let stroke = ANNOTATION_STROKE.to_string();
    if table.relations.contact_connected(members) {
        let bbox = elements
            .iter()
            .map(|e| e.bbox)
            .reduce(|a, b| a.union(&b))
            .unwrap_or(BoundingBox::new(0.0, 0.0, 0.0, 0.0))
            .expand(OUTLINE_PADDING);
        Candidate {
            kind: SuggestionKind::AddAnnotation,
            channel: None,
            value: "outline".into(),
            code_expression: format!(
                "insert <rect fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{ANNOTATION_WIDTH}\"> around the group"
            ),
            edit: EditCommand::InsertAnnotation {
                mark: AnnotationMark::Outline {
                    bbox,
                    stroke,
                    stroke_width: ANNOTATION_WIDTH,
                },
            },
        }
    } else {
        let mut points: Vec<Point> = elements.iter().map(|e| e.centroid()).collect();
        points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let n = points.len();
        Candidate {
            kind: SuggestionKind::AddAnnotation,
            channel: None,
            value: "connector".into(),
            code_expression: format!(
                "insert <polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{ANNOTATION_WIDTH}\"> through {n} centroids"
            ),
            edit: EditCommand::InsertAnnotation {
                mark: AnnotationMark::Connector {
                    points,
                    stroke,
                    stroke_width: ANNOTATION_WIDTH,
                },
            },
        }
    }
}
