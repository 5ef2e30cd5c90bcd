//! Parsed SVG charts: a flat list of renderable elements with resolved
//! styles and canvas-space geometry, plus textual edits back to the source.

mod edit;
mod geom;
mod parse;

pub use edit::{apply_edit, AnnotationMark, Axis, EditCommand};
pub use geom::{Affine, BoundingBox, Point};
pub use parse::parse_chart;

use crate::color::{Rgb, Rgba};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("malformed SVG: {0}")]
    MalformedSvg(String),
    #[error("SVG root has neither width/height nor a viewBox")]
    NoCanvas,
    #[error("unknown element id `{0}`")]
    UnknownElementId(String),
    #[error("invalid value `{value}` for attribute `{attribute}`")]
    InvalidAttributeValue { attribute: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Rect,
    Circle,
    Ellipse,
    Line,
    Polyline,
    Polygon,
    Path,
    Text,
    Image,
    Other,
}

impl ElementKind {
    pub const ALL: [ElementKind; 10] = [
        ElementKind::Rect,
        ElementKind::Circle,
        ElementKind::Ellipse,
        ElementKind::Line,
        ElementKind::Polyline,
        ElementKind::Polygon,
        ElementKind::Path,
        ElementKind::Text,
        ElementKind::Image,
        ElementKind::Other,
    ];

    pub fn ordinal(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).unwrap_or(0)
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Rect => "rect",
            ElementKind::Circle => "circle",
            ElementKind::Ellipse => "ellipse",
            ElementKind::Line => "line",
            ElementKind::Polyline => "polyline",
            ElementKind::Polygon => "polygon",
            ElementKind::Path => "path",
            ElementKind::Text => "text",
            ElementKind::Image => "image",
            ElementKind::Other => "other",
        }
    }

    pub(crate) fn from_tag(tag: &str) -> Option<ElementKind> {
        Some(match tag {
            "rect" => ElementKind::Rect,
            "circle" => ElementKind::Circle,
            "ellipse" => ElementKind::Ellipse,
            "line" => ElementKind::Line,
            "polyline" => ElementKind::Polyline,
            "polygon" => ElementKind::Polygon,
            "path" => ElementKind::Path,
            "text" => ElementKind::Text,
            "image" => ElementKind::Image,
            _ => return None,
        })
    }
}

/// Kind-specific coordinates, already mapped through every ancestor transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geometry {
    Rect {
        corners: [Point; 4],
    },
    /// Circles and ellipses; the axes are the transformed radius vectors.
    Ellipse {
        center: Point,
        axis_x: Point,
        axis_y: Point,
    },
    Line {
        from: Point,
        to: Point,
    },
    Points {
        points: Vec<Point>,
    },
    Path {
        subpaths: Vec<Subpath>,
    },
    Text {
        anchor: Point,
        font_size: f64,
        content: String,
    },
    Other {
        points: Vec<Point>,
    },
}

/// One path subpath; `points` includes bezier control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subpath {
    pub points: Vec<Point>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedStyle {
    /// `None` means `fill="none"`. Alpha already folds in `fill-opacity`.
    pub fill: Option<Rgba>,
    pub stroke: Option<Rgba>,
    pub stroke_width: f64,
    /// Product of the element's and its ancestors' `opacity`.
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphicalElement {
    pub id: String,
    pub kind: ElementKind,
    pub closed: bool,
    pub geometry: Geometry,
    pub style: ResolvedStyle,
    pub bbox: BoundingBox,
    /// `display:none`, `visibility:hidden` or zero opacity; bbox is collapsed.
    pub hidden: bool,
    /// Transform from the parent's user space to canvas space.
    #[serde(skip)]
    pub(crate) parent_ctm: Affine,
}

impl GraphicalElement {
    pub fn centroid(&self) -> Point {
        self.bbox.centroid()
    }
}

/// Paint of an element after compositing over the chart backdrop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlendedPaint {
    pub fill: Option<Rgb>,
    pub stroke: Option<Rgb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDocument {
    pub source_text: String,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub elements: Vec<GraphicalElement>,
    pub background_color: Rgb,
    pub warnings: Vec<String>,
    /// viewBox mapping from root user space to canvas space.
    #[serde(skip)]
    pub(crate) root_ctm: Affine,
}

impl ChartDocument {
    pub fn serialize(&self) -> &str {
        &self.source_text
    }

    pub fn canvas_diagonal(&self) -> f64 {
        self.canvas_width.hypot(self.canvas_height)
    }

    pub fn element(&self, id: &str) -> Option<&GraphicalElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect()
    }

    /// Short content digest used to detect stale suggestions.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let hash = Sha256::digest(self.source_text.as_bytes());
        hash.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

/// Composite an element's fill and stroke over the document backdrop.
pub fn blended_color(element: &GraphicalElement, doc: &ChartDocument) -> BlendedPaint {
    let backdrop = doc.background_color;
    let opacity = element.style.opacity;
    BlendedPaint {
        fill: element.style.fill.map(|c| c.over(backdrop, opacity)),
        stroke: element.style.stroke.map(|c| c.over(backdrop, opacity)),
    }
}
