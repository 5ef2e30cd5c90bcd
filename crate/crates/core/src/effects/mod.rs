//! The 23-dimensional visual-effect vector: 13 appearance dimensions and
//! 10 position dimensions, normalised per chart.
//!
//! | index | dimension            | normalisation            |
//! |-------|----------------------|--------------------------|
//! | 0     | `type_code`          | per-chart min–max        |
//! | 1–2   | `fill_hue_sin/cos`   | fixed `[-1, 1]`          |
//! | 3–4   | `fill_saturation/lightness` | per-chart min–max |
//! | 5–6   | `stroke_hue_sin/cos` | fixed `[-1, 1]`          |
//! | 7–8   | `stroke_saturation/lightness` | per-chart min–max |
//! | 9     | `stroke_width`       | per-chart min–max        |
//! | 10–12 | `bbox_width`, `bbox_height`, `area` | per-chart min–max |
//! | 13–18 | centroid and bbox edges | fixed `[0, canvas extent]` |
//! | 19–22 | MDS of contact and region matrices | per-chart min–max |
//!
//! Dimensions that do not apply to an element (fill on a line, stroke on an
//! unstroked shape) are masked: value 0, mask `false`. A dimension that is
//! constant over the chart normalises to 0.5.

mod mds;
mod relations;
mod table;

pub use mds::{contact_distances, mds_embed, region_distances, MdsEmbedding};
pub use relations::{build_relationship_matrices, relationship_matrices_for, RelationshipMatrices};
pub use table::{extract_features, extract_features_scoped, ChartFeatureTable, DimNormalization, NormalizationMethod};

use crate::chart::{blended_color, ChartDocument, ElementKind, GraphicalElement};
use crate::color::{hue_to_components, rgb_to_hsl};
use serde::{Deserialize, Serialize};

pub const DIM_COUNT: usize = 23;
pub const APPEARANCE_DIMS: usize = 13;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("chart has no elements in scope")]
    EmptyChart,
    #[error("unknown element id `{0}`")]
    UnknownElementId(String),
    #[error("distance matrix must be square, symmetric and zero on the diagonal")]
    InvalidDistanceMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dim {
    TypeCode,
    FillHueSin,
    FillHueCos,
    FillSaturation,
    FillLightness,
    StrokeHueSin,
    StrokeHueCos,
    StrokeSaturation,
    StrokeLightness,
    StrokeWidth,
    BboxWidth,
    BboxHeight,
    Area,
    CentroidX,
    CentroidY,
    BboxLeft,
    BboxRight,
    BboxTop,
    BboxBottom,
    MdsContact1,
    MdsContact2,
    MdsRegion1,
    MdsRegion2,
}

impl Dim {
    pub const ALL: [Dim; DIM_COUNT] = [
        Dim::TypeCode,
        Dim::FillHueSin,
        Dim::FillHueCos,
        Dim::FillSaturation,
        Dim::FillLightness,
        Dim::StrokeHueSin,
        Dim::StrokeHueCos,
        Dim::StrokeSaturation,
        Dim::StrokeLightness,
        Dim::StrokeWidth,
        Dim::BboxWidth,
        Dim::BboxHeight,
        Dim::Area,
        Dim::CentroidX,
        Dim::CentroidY,
        Dim::BboxLeft,
        Dim::BboxRight,
        Dim::BboxTop,
        Dim::BboxBottom,
        Dim::MdsContact1,
        Dim::MdsContact2,
        Dim::MdsRegion1,
        Dim::MdsRegion2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        DIMENSION_NAMES[self.index()]
    }

    pub fn from_name(name: &str) -> Option<Dim> {
        DIMENSION_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| Dim::ALL[i])
    }

    pub(crate) fn normalization(self) -> NormalizationMethod {
        use Dim::*;
        match self {
            FillHueSin | FillHueCos | StrokeHueSin | StrokeHueCos => NormalizationMethod::Periodic,
            CentroidX | BboxLeft | BboxRight => NormalizationMethod::CanvasWidth,
            CentroidY | BboxTop | BboxBottom => NormalizationMethod::CanvasHeight,
            _ => NormalizationMethod::MinMax,
        }
    }
}

pub const DIMENSION_NAMES: [&str; DIM_COUNT] = [
    "type_code",
    "fill_hue_sin",
    "fill_hue_cos",
    "fill_saturation",
    "fill_lightness",
    "stroke_hue_sin",
    "stroke_hue_cos",
    "stroke_saturation",
    "stroke_lightness",
    "stroke_width",
    "bbox_width",
    "bbox_height",
    "area",
    "centroid_x",
    "centroid_y",
    "bbox_left",
    "bbox_right",
    "bbox_top",
    "bbox_bottom",
    "mds_contact_1",
    "mds_contact_2",
    "mds_region_1",
    "mds_region_2",
];

/// One element's effect values with the applicability mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectVector {
    pub values: [f64; DIM_COUNT],
    pub presence_mask: [bool; DIM_COUNT],
}

impl EffectVector {
    pub fn get(&self, dim: Dim) -> Option<f64> {
        self.presence_mask[dim.index()].then(|| self.values[dim.index()])
    }

    /// Values with masked dimensions forced to zero.
    pub fn masked_values(&self) -> [f64; DIM_COUNT] {
        let mut out = self.values;
        for (v, present) in out.iter_mut().zip(self.presence_mask) {
            if !present {
                *v = 0.0;
            }
        }
        out
    }
}

/// Raw (un-normalised) appearance dimensions of one element.
pub fn extract_appearance(
    element: &GraphicalElement,
    doc: &ChartDocument,
) -> ([f64; APPEARANCE_DIMS], [bool; APPEARANCE_DIMS]) {
    let mut values = [0.0; APPEARANCE_DIMS];
    let mut mask = [false; APPEARANCE_DIMS];
    let mut set = |dim: Dim, v: f64| {
        values[dim.index()] = v;
        mask[dim.index()] = true;
    };

    let kinds = (ElementKind::ALL.len() - 1) as f64;
    set(Dim::TypeCode, element.kind.ordinal() as f64 / kinds);

    let paint = blended_color(element, doc);
    // a line never paints its interior
    if let Some(fill) = paint.fill.filter(|_| element.kind != ElementKind::Line) {
        let hsl = rgb_to_hsl(fill);
        let (s, c) = hue_to_components(hsl.h);
        set(Dim::FillHueSin, s);
        set(Dim::FillHueCos, c);
        set(Dim::FillSaturation, hsl.s);
        set(Dim::FillLightness, hsl.l);
    }
    if let Some(stroke) = paint.stroke.filter(|_| element.style.stroke_width > 0.0) {
        let hsl = rgb_to_hsl(stroke);
        let (s, c) = hue_to_components(hsl.h);
        set(Dim::StrokeHueSin, s);
        set(Dim::StrokeHueCos, c);
        set(Dim::StrokeSaturation, hsl.s);
        set(Dim::StrokeLightness, hsl.l);
        set(Dim::StrokeWidth, element.style.stroke_width);
    }
    set(Dim::BboxWidth, element.bbox.width());
    set(Dim::BboxHeight, element.bbox.height());
    set(Dim::Area, element.bbox.area());
    (values, mask)
}
