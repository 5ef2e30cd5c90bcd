use super::{
    Affine, BoundingBox, ChartDocument, ChartError, ElementKind, Geometry, GraphicalElement,
    Point, ResolvedStyle, Subpath,
};
use crate::color::{parse_css_color, Rgb, Rgba};
use roxmltree::{Document, Node};
use std::collections::{HashMap, HashSet};

const DEFAULT_FONT_SIZE: f64 = 16.0;
/// Text extent heuristic: average glyph advance as a fraction of font size.
pub(crate) const GLYPH_ADVANCE: f64 = 0.6;

/// Elements that never render directly and whose subtrees are skipped.
const NON_RENDERING: &[&str] = &[
    "defs",
    "clipPath",
    "mask",
    "pattern",
    "marker",
    "symbol",
    "linearGradient",
    "radialGradient",
    "style",
    "script",
    "title",
    "desc",
    "metadata",
    "filter",
];

const CONTAINERS: &[&str] = &["g", "a", "switch", "svg"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Paint {
    None,
    Color(Rgba),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Anchor {
    Start,
    Middle,
    End,
}

/// Inherited presentation state while descending the tree.
#[derive(Debug, Clone)]
struct Inherited {
    fill: Paint,
    stroke: Paint,
    stroke_width: f64,
    fill_opacity: f64,
    stroke_opacity: f64,
    font_size: f64,
    anchor: Anchor,
    opacity: f64,
    display_none: bool,
    visibility_hidden: bool,
    ctm: Affine,
}

impl Inherited {
    fn root(ctm: Affine) -> Self {
        Inherited {
            fill: Paint::Color(Rgba::new(0, 0, 0, 1.0)),
            stroke: Paint::None,
            stroke_width: 1.0,
            fill_opacity: 1.0,
            stroke_opacity: 1.0,
            font_size: DEFAULT_FONT_SIZE,
            anchor: Anchor::Start,
            opacity: 1.0,
            display_none: false,
            visibility_hidden: false,
            ctm,
        }
    }
}

/// A renderable leaf found while walking the document.
pub(crate) struct Visit<'a, 'input> {
    pub id: String,
    pub node: Node<'a, 'input>,
    pub kind: ElementKind,
    state: Inherited,
    parent_ctm: Affine,
}

pub(crate) struct Walk<'a, 'input> {
    pub visits: Vec<Visit<'a, 'input>>,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub root_ctm: Affine,
    pub warnings: Vec<String>,
}

struct Walker<'a, 'input> {
    gradients: HashMap<String, Rgba>,
    visits: Vec<Visit<'a, 'input>>,
    warnings: Vec<String>,
    seen_ids: HashSet<String>,
    namespace: Option<&'a str>,
    canvas: (f64, f64),
}

pub(crate) fn parse_xml(svg_text: &str) -> Result<Document<'_>, ChartError> {
    Document::parse(svg_text).map_err(|e| ChartError::MalformedSvg(e.to_string()))
}

pub(crate) fn walk<'a, 'input>(doc: &'a Document<'input>) -> Result<Walk<'a, 'input>, ChartError> {
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(ChartError::MalformedSvg(format!(
            "root element is <{}>, expected <svg>",
            root.tag_name().name()
        )));
    }
    let (canvas_width, canvas_height, root_ctm) = canvas_of(root)?;

    let mut walker = Walker {
        gradients: collect_gradients(doc),
        visits: Vec::new(),
        warnings: Vec::new(),
        seen_ids: HashSet::new(),
        namespace: root.tag_name().namespace(),
        canvas: (canvas_width, canvas_height),
    };
    let mut state = Inherited::root(root_ctm);
    walker.apply_declarations(root, &mut state, "/svg");
    // the root's own transform attribute is not part of the viewBox mapping
    walker.descend(root, &state, "/svg");

    let mut warnings = Vec::new();
    for w in walker.warnings {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    Ok(Walk {
        visits: walker.visits,
        canvas_width,
        canvas_height,
        root_ctm,
        warnings,
    })
}

/// Parse SVG text into a [`ChartDocument`].
pub fn parse_chart(svg_text: &str) -> Result<ChartDocument, ChartError> {
    let xml = parse_xml(svg_text)?;
    let walk = walk(&xml)?;
    let mut warnings = walk.warnings;
    let elements: Vec<GraphicalElement> = walk
        .visits
        .iter()
        .map(|v| build_element(v, &mut warnings))
        .collect();
    let background_color = backdrop(&elements, walk.canvas_width * walk.canvas_height);
    Ok(ChartDocument {
        source_text: svg_text.to_string(),
        canvas_width: walk.canvas_width,
        canvas_height: walk.canvas_height,
        elements,
        background_color,
        warnings,
        root_ctm: walk.root_ctm,
    })
}

fn canvas_of(root: Node) -> Result<(f64, f64, Affine), ChartError> {
    let abs_len = |name: &str| -> Option<f64> {
        let len: svgtypes::Length = root.attribute(name)?.parse().ok()?;
        absolute_length(len, DEFAULT_FONT_SIZE).filter(|v| *v > 0.0)
    };
    let width = abs_len("width");
    let height = abs_len("height");
    let view_box = root
        .attribute("viewBox")
        .and_then(|v| v.parse::<svgtypes::ViewBox>().ok())
        .filter(|vb| vb.w > 0.0 && vb.h > 0.0);

    match (width, height, view_box) {
        (Some(w), Some(h), None) => Ok((w, h, Affine::IDENTITY)),
        (w, h, Some(vb)) => {
            let (w, h) = match (w, h) {
                (Some(w), Some(h)) => (w, h),
                (Some(w), None) => (w, w * vb.h / vb.w),
                (None, Some(h)) => (h * vb.w / vb.h, h),
                (None, None) => (vb.w, vb.h),
            };
            let ctm = Affine::scale(w / vb.w, h / vb.h).then_inner(&Affine::translate(-vb.x, -vb.y));
            Ok((w, h, ctm))
        }
        _ => Err(ChartError::NoCanvas),
    }
}

fn absolute_length(len: svgtypes::Length, font_size: f64) -> Option<f64> {
    use svgtypes::LengthUnit as U;
    let n = len.number;
    let v = match len.unit {
        U::None | U::Px => n,
        U::Pt => n * 4.0 / 3.0,
        U::Pc => n * 16.0,
        U::In => n * 96.0,
        U::Cm => n * 96.0 / 2.54,
        U::Mm => n * 96.0 / 25.4,
        U::Em => n * font_size,
        U::Ex => n * font_size / 2.0,
        U::Percent => return None,
    };
    v.is_finite().then_some(v)
}

fn collect_gradients(doc: &Document) -> HashMap<String, Rgba> {
    let by_id: HashMap<&str, Node> = doc
        .descendants()
        .filter(|n| {
            n.is_element() && matches!(n.tag_name().name(), "linearGradient" | "radialGradient")
        })
        .filter_map(|n| Some((n.attribute("id")?, n)))
        .collect();

    let mut out = HashMap::new();
    for (&id, &node) in &by_id {
        // follow href chains for gradients that only inherit their stops
        let mut current = node;
        let mut hops = 0;
        let stops = loop {
            let stops: Vec<Rgba> = current
                .children()
                .filter(|c| c.is_element() && c.tag_name().name() == "stop")
                .map(stop_color)
                .collect();
            if !stops.is_empty() || hops > 8 {
                break stops;
            }
            match href_of(current).and_then(|h| by_id.get(h)) {
                Some(next) => current = *next,
                None => break stops,
            }
            hops += 1;
        };
        if stops.is_empty() {
            continue;
        }
        let n = stops.len() as f64;
        let avg = |f: fn(&Rgba) -> f64| stops.iter().map(f).sum::<f64>() / n;
        out.insert(
            id.to_string(),
            Rgba::new(
                avg(|c| f64::from(c.r)).round() as u8,
                avg(|c| f64::from(c.g)).round() as u8,
                avg(|c| f64::from(c.b)).round() as u8,
                avg(|c| c.a),
            ),
        );
    }
    out
}

fn href_of<'a>(node: Node<'a, '_>) -> Option<&'a str> {
    node.attributes()
        .find(|a| a.name() == "href")
        .map(|a| a.value().trim_start_matches('#'))
}

fn stop_color(stop: Node) -> Rgba {
    let mut color = Rgba::new(0, 0, 0, 1.0);
    let mut opacity = 1.0;
    for (name, value) in declarations(stop) {
        match name.as_str() {
            "stop-color" => {
                if let Some(c) = parse_css_color(&value) {
                    color = c;
                }
            }
            "stop-opacity" => {
                if let Ok(v) = value.trim().parse::<f64>() {
                    opacity = v.clamp(0.0, 1.0);
                }
            }
            _ => {}
        }
    }
    Rgba { a: color.a * opacity, ..color }
}

/// Presentation attributes followed by inline `style` declarations, so later
/// entries take precedence.
fn declarations(node: Node) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = node
        .attributes()
        .filter(|a| a.namespace().is_none() && a.name() != "style")
        .map(|a| (a.name().to_string(), a.value().to_string()))
        .collect();
    if let Some(style) = node.attribute("style") {
        out.extend(parse_style(style));
    }
    out
}

pub(crate) fn parse_style(style: &str) -> Vec<(String, String)> {
    style
        .split(';')
        .filter_map(|decl| {
            let (k, v) = decl.split_once(':')?;
            let k = k.trim();
            let v = v.trim().trim_end_matches("!important").trim();
            (!k.is_empty()).then(|| (k.to_string(), v.to_string()))
        })
        .collect()
}

impl<'a, 'input> Walker<'a, 'input> {
    fn descend(&mut self, parent: Node<'a, 'input>, state: &Inherited, path: &str) {
        let mut tag_counts: HashMap<&str, usize> = HashMap::new();
        for child in parent.children().filter(|c| c.is_element()) {
            let tag = child.tag_name().name();
            let count = tag_counts.entry(tag).or_insert(0);
            *count += 1;
            let child_path = format!("{path}/{tag}[{count}]");

            if child.tag_name().namespace() != self.namespace {
                continue;
            }
            if tag == "style" {
                self.warnings
                    .push("embedded <style> sheets are ignored; use presentation attributes".into());
            }
            if NON_RENDERING.contains(&tag) {
                continue;
            }

            let mut child_state = state.clone();
            let parent_ctm = state.ctm;
            if let Some(t) = child.attribute("transform") {
                match t.parse::<svgtypes::Transform>() {
                    Ok(t) => child_state.ctm = parent_ctm.then_inner(&Affine::from(t)),
                    Err(_) => self
                        .warnings
                        .push(format!("{child_path}: unparsable transform `{t}` ignored")),
                }
            }
            self.apply_declarations(child, &mut child_state, &child_path);

            if CONTAINERS.contains(&tag) {
                self.descend(child, &child_state, &child_path);
                continue;
            }
            let kind = ElementKind::from_tag(tag).unwrap_or(ElementKind::Other);
            let id = self.unique_id(child, &child_path);
            self.visits.push(Visit {
                id,
                node: child,
                kind,
                state: child_state,
                parent_ctm,
            });
        }
    }

    fn unique_id(&mut self, node: Node, path: &str) -> String {
        let base = node
            .attribute("id")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .unwrap_or(path)
            .to_string();
        let mut id = base.clone();
        let mut n = 2;
        while self.seen_ids.contains(&id) {
            id = format!("{base}~{n}");
            n += 1;
        }
        if id != base {
            self.warnings
                .push(format!("duplicate element id `{base}` renamed to `{id}`"));
        }
        self.seen_ids.insert(id.clone());
        id
    }

    fn apply_declarations(&mut self, node: Node, state: &mut Inherited, path: &str) {
        if node.attribute("class").is_some() {
            self.warnings
                .push(format!("{path}: CSS classes are unsupported; default styles used"));
        }
        for (name, value) in declarations(node) {
            let v = value.trim();
            match name.as_str() {
                "fill" => {
                    if let Some(p) = self.paint(v, path, state.fill) {
                        state.fill = p;
                    }
                }
                "stroke" => {
                    if let Some(p) = self.paint(v, path, state.stroke) {
                        state.stroke = p;
                    }
                }
                "stroke-width" => match self.length(v, state.font_size) {
                    Some(w) if w >= 0.0 => state.stroke_width = w,
                    Some(_) => {
                        self.warnings
                            .push(format!("{path}: negative stroke-width clamped to 0"));
                        state.stroke_width = 0.0;
                    }
                    None => {}
                },
                "fill-opacity" => {
                    if let Some(o) = parse_opacity(v) {
                        state.fill_opacity = o;
                    }
                }
                "stroke-opacity" => {
                    if let Some(o) = parse_opacity(v) {
                        state.stroke_opacity = o;
                    }
                }
                "opacity" => {
                    if let Some(o) = parse_opacity(v) {
                        state.opacity *= o;
                    }
                }
                "font-size" => {
                    if let Some(fs) = self.length(v, state.font_size).filter(|f| *f > 0.0) {
                        state.font_size = fs;
                    }
                }
                "text-anchor" => {
                    state.anchor = match v {
                        "middle" => Anchor::Middle,
                        "end" => Anchor::End,
                        _ => Anchor::Start,
                    }
                }
                "display" => {
                    if v == "none" {
                        state.display_none = true;
                    }
                }
                "visibility" => state.visibility_hidden = matches!(v, "hidden" | "collapse"),
                _ => {}
            }
        }
    }

    /// `None` keeps the inherited paint (`inherit` or unparsable values).
    fn paint(&mut self, value: &str, path: &str, inherited: Paint) -> Option<Paint> {
        match value {
            "none" | "transparent" => return Some(Paint::None),
            "inherit" => return Some(inherited),
            "currentColor" | "currentcolor" => {
                self.warnings
                    .push(format!("{path}: currentColor is unsupported; default paint used"));
                return None;
            }
            _ => {}
        }
        if let Some(rest) = value.strip_prefix("url(") {
            let (target, fallback) = match rest.split_once(')') {
                Some((t, f)) => (t, f.trim()),
                None => (rest, ""),
            };
            let target = target.trim().trim_matches(|c| c == '"' || c == '\'');
            let target = target.trim_start_matches('#');
            if let Some(c) = self.gradients.get(target) {
                return Some(Paint::Color(*c));
            }
            self.warnings.push(format!(
                "{path}: paint server `{target}` not found or unsupported"
            ));
            return Some(if fallback.is_empty() {
                Paint::None
            } else {
                parse_css_color(fallback).map_or(Paint::None, Paint::Color)
            });
        }
        match parse_css_color(value) {
            Some(c) => Some(Paint::Color(c)),
            None => {
                self.warnings
                    .push(format!("{path}: unparsable paint `{value}` ignored"));
                None
            }
        }
    }

    fn length(&self, value: &str, font_size: f64) -> Option<f64> {
        let len: svgtypes::Length = value.parse().ok()?;
        if len.unit == svgtypes::LengthUnit::Percent {
            let (w, h) = self.canvas;
            let diag = (w * w + h * h).sqrt() / std::f64::consts::SQRT_2;
            return Some(len.number / 100.0 * diag);
        }
        absolute_length(len, font_size)
    }
}

fn parse_opacity(value: &str) -> Option<f64> {
    let v = value.trim();
    let parsed = match v.strip_suffix('%') {
        Some(p) => p.trim().parse::<f64>().ok()? / 100.0,
        None => v.parse::<f64>().ok()?,
    };
    parsed.is_finite().then(|| parsed.clamp(0.0, 1.0))
}

fn build_element(visit: &Visit, warnings: &mut Vec<String>) -> GraphicalElement {
    let node = visit.node;
    let state = &visit.state;
    let ctm = state.ctm;
    let canvas_ref = |name: &str| -> f64 { attr_len(node, name, state.font_size).unwrap_or(0.0) };

    let (geometry, closed) = match visit.kind {
        ElementKind::Rect | ElementKind::Image => {
            let (x, y) = (canvas_ref("x"), canvas_ref("y"));
            let w = canvas_ref("width").max(0.0);
            let h = canvas_ref("height").max(0.0);
            let corners = [
                Point::new(x, y),
                Point::new(x + w, y),
                Point::new(x + w, y + h),
                Point::new(x, y + h),
            ]
            .map(|p| ctm.apply(p));
            (Geometry::Rect { corners }, visit.kind == ElementKind::Rect)
        }
        ElementKind::Circle | ElementKind::Ellipse => {
            let center = Point::new(canvas_ref("cx"), canvas_ref("cy"));
            let (rx, ry) = if visit.kind == ElementKind::Circle {
                let r = canvas_ref("r").max(0.0);
                (r, r)
            } else {
                let rx = attr_len(node, "rx", state.font_size);
                let ry = attr_len(node, "ry", state.font_size);
                // `auto` radii mirror the other axis
                let rx_v = rx.or(ry).unwrap_or(0.0).max(0.0);
                let ry_v = ry.or(rx).unwrap_or(0.0).max(0.0);
                (rx_v, ry_v)
            };
            (
                Geometry::Ellipse {
                    center: ctm.apply(center),
                    axis_x: ctm.apply_vector(Point::new(rx, 0.0)),
                    axis_y: ctm.apply_vector(Point::new(0.0, ry)),
                },
                true,
            )
        }
        ElementKind::Line => (
            Geometry::Line {
                from: ctm.apply(Point::new(canvas_ref("x1"), canvas_ref("y1"))),
                to: ctm.apply(Point::new(canvas_ref("x2"), canvas_ref("y2"))),
            },
            false,
        ),
        ElementKind::Polyline | ElementKind::Polygon => {
            let points = node
                .attribute("points")
                .map(|p| {
                    svgtypes::PointsParser::from(p)
                        .map(|(x, y)| ctm.apply(Point::new(x, y)))
                        .collect()
                })
                .unwrap_or_default();
            (
                Geometry::Points { points },
                visit.kind == ElementKind::Polygon,
            )
        }
        ElementKind::Path => {
            let subpaths = path_subpaths(node.attribute("d").unwrap_or(""), &ctm, &visit.id, warnings);
            let closed = !subpaths.is_empty() && subpaths.iter().all(|s| s.closed);
            (Geometry::Path { subpaths }, closed)
        }
        ElementKind::Text => {
            let x = first_list_value(node.attribute("x"));
            let y = first_list_value(node.attribute("y"));
            let content: String = node
                .descendants()
                .filter(|n| n.is_text())
                .filter_map(|n| n.text())
                .collect::<Vec<_>>()
                .join(" ");
            let content = content.split_whitespace().collect::<Vec<_>>().join(" ");
            (
                Geometry::Text {
                    anchor: ctm.apply(Point::new(x, y)),
                    font_size: state.font_size * ctm.mean_scale(),
                    content,
                },
                false,
            )
        }
        ElementKind::Other => {
            let xs: Vec<f64> = ["x", "x1", "x2", "cx"]
                .iter()
                .filter_map(|a| attr_len(node, a, state.font_size))
                .collect();
            let ys: Vec<f64> = ["y", "y1", "y2", "cy"]
                .iter()
                .filter_map(|a| attr_len(node, a, state.font_size))
                .collect();
            let x0 = xs.first().copied().unwrap_or(0.0);
            let y0 = ys.first().copied().unwrap_or(0.0);
            let mut xs = if xs.is_empty() { vec![0.0] } else { xs };
            let mut ys = if ys.is_empty() { vec![0.0] } else { ys };
            if let Some(w) = attr_len(node, "width", state.font_size) {
                xs.push(x0 + w);
            }
            if let Some(h) = attr_len(node, "height", state.font_size) {
                ys.push(y0 + h);
            }
            let (xmin, xmax) = min_max(&xs);
            let (ymin, ymax) = min_max(&ys);
            let points = [
                Point::new(xmin, ymin),
                Point::new(xmax, ymin),
                Point::new(xmax, ymax),
                Point::new(xmin, ymax),
            ]
            .iter()
            .map(|p| ctm.apply(*p))
            .collect();
            (Geometry::Other { points }, false)
        }
    };

    let scale = ctm.mean_scale();
    let resolve = |paint: Paint, extra: f64| match paint {
        Paint::None => None,
        Paint::Color(c) => Some(Rgba { a: c.a * extra, ..c }),
    };
    let style = ResolvedStyle {
        fill: resolve(state.fill, state.fill_opacity),
        stroke: resolve(state.stroke, state.stroke_opacity),
        stroke_width: state.stroke_width * scale,
        opacity: state.opacity,
    };
    let hidden = state.display_none || state.visibility_hidden || state.opacity <= 0.0;
    let mut bbox = geometry_bbox(&geometry, &state.anchor);
    if hidden {
        bbox = bbox.collapsed();
    }
    GraphicalElement {
        id: visit.id.clone(),
        kind: visit.kind,
        closed,
        geometry,
        style,
        bbox,
        hidden,
        parent_ctm: visit.parent_ctm,
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

fn attr_len(node: Node, name: &str, font_size: f64) -> Option<f64> {
    let len: svgtypes::Length = node.attribute(name)?.trim().parse().ok()?;
    if len.unit == svgtypes::LengthUnit::Percent {
        return None;
    }
    absolute_length(len, font_size)
}

fn first_list_value(value: Option<&str>) -> f64 {
    value
        .and_then(|v| {
            v.split(|c: char| c.is_whitespace() || c == ',')
                .find(|s| !s.is_empty())
        })
        .and_then(|s| s.parse::<svgtypes::Length>().ok())
        .and_then(|l| absolute_length(l, DEFAULT_FONT_SIZE))
        .unwrap_or(0.0)
}

fn path_subpaths(d: &str, ctm: &Affine, id: &str, warnings: &mut Vec<String>) -> Vec<Subpath> {
    use svgtypes::SimplePathSegment as S;
    let mut subpaths: Vec<Subpath> = Vec::new();
    for seg in svgtypes::SimplifyingPathParser::from(d) {
        let seg = match seg {
            Ok(s) => s,
            Err(e) => {
                warnings.push(format!("{id}: path data truncated at error: {e}"));
                break;
            }
        };
        let mut push = |pts: &[(f64, f64)], new_subpath: bool| {
            if new_subpath || subpaths.is_empty() {
                subpaths.push(Subpath {
                    points: Vec::new(),
                    closed: false,
                });
            }
            let current = subpaths.last_mut().expect("subpath pushed above");
            current
                .points
                .extend(pts.iter().map(|&(x, y)| ctm.apply(Point::new(x, y))));
        };
        match seg {
            S::MoveTo { x, y } => push(&[(x, y)], true),
            S::LineTo { x, y } => push(&[(x, y)], false),
            S::CurveTo { x1, y1, x2, y2, x, y } => push(&[(x1, y1), (x2, y2), (x, y)], false),
            S::Quadratic { x1, y1, x, y } => push(&[(x1, y1), (x, y)], false),
            S::ClosePath => {
                if let Some(last) = subpaths.last_mut() {
                    last.closed = true;
                }
            }
        }
    }
    subpaths
}

fn geometry_bbox(geometry: &Geometry, anchor: &Anchor) -> BoundingBox {
    let fallback = BoundingBox::default();
    match geometry {
        Geometry::Rect { corners } => BoundingBox::from_points(corners.iter().copied()).unwrap_or(fallback),
        Geometry::Ellipse {
            center,
            axis_x,
            axis_y,
        } => {
            let hx = axis_x.x.hypot(axis_y.x);
            let hy = axis_x.y.hypot(axis_y.y);
            BoundingBox::new(center.x - hx, center.x + hx, center.y - hy, center.y + hy)
        }
        Geometry::Line { from, to } => BoundingBox::from_points([*from, *to]).unwrap_or(fallback),
        Geometry::Points { points } | Geometry::Other { points } => {
            BoundingBox::from_points(points.iter().copied()).unwrap_or(fallback)
        }
        Geometry::Path { subpaths } => {
            BoundingBox::from_points(subpaths.iter().flat_map(|s| s.points.iter().copied()))
                .unwrap_or(fallback)
        }
        Geometry::Text {
            anchor: at,
            font_size,
            content,
        } => {
            let width = GLYPH_ADVANCE * font_size * content.chars().count() as f64;
            let left = match anchor {
                Anchor::Start => at.x,
                Anchor::Middle => at.x - width / 2.0,
                Anchor::End => at.x - width,
            };
            BoundingBox::new(left, left + width, at.y - font_size, at.y)
        }
    }
}

/// Fill of the largest visible rect covering ≥95% of the canvas, else white.
fn backdrop(elements: &[GraphicalElement], canvas_area: f64) -> Rgb {
    let mut best: Option<&GraphicalElement> = None;
    for e in elements {
        if e.kind != ElementKind::Rect || e.hidden || e.style.fill.is_none() {
            continue;
        }
        if e.bbox.area() < 0.95 * canvas_area {
            continue;
        }
        if best.is_none_or(|b| e.bbox.area() > b.bbox.area()) {
            best = Some(e);
        }
    }
    best.and_then(|e| e.style.fill.map(|f| f.over(Rgb::WHITE, e.style.opacity)))
        .unwrap_or(Rgb::WHITE)
}
