use super::parse::{parse_style, parse_xml, walk};
use super::{parse_chart, BoundingBox, ChartDocument, ChartError, Point};
use crate::color::parse_css_color;
use roxmltree::Node;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// An auxiliary mark drawn on top of the chart, in canvas coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum AnnotationMark {
    /// Unfilled rectangle drawn around a region.
    Outline {
        bbox: BoundingBox,
        stroke: String,
        stroke_width: f64,
    },
    /// Open polyline linking a sequence of points.
    Connector {
        points: Vec<Point>,
        stroke: String,
        stroke_width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditCommand {
    SetAttribute {
        ids: Vec<String>,
        attribute: String,
        value: String,
    },
    /// Move elements by `delta` canvas pixels along one axis.
    BatchShift {
        ids: Vec<String>,
        axis: Axis,
        delta: f64,
    },
    InsertAnnotation {
        mark: AnnotationMark,
    },
    /// Whole-document replacement, as produced by a text editor.
    ReplaceSource {
        svg: String,
    },
    /// Edits applied in order.
    Batch {
        edits: Vec<EditCommand>,
    },
}

/// Apply `edit` as textual changes to the document source and reparse.
pub fn apply_edit(doc: &ChartDocument, edit: &EditCommand) -> Result<ChartDocument, ChartError> {
    match edit {
        EditCommand::SetAttribute {
            ids,
            attribute,
            value,
        } => {
            validate_attribute(attribute, value)?;
            let text = rewrite_attributes(doc, ids, |_| Ok((attribute.clone(), value.clone())))?;
            parse_chart(&text)
        }
        EditCommand::BatchShift { ids, axis, delta } => {
            if !delta.is_finite() {
                return Err(invalid("delta", &delta.to_string()));
            }
            let canvas_delta = match axis {
                Axis::Horizontal => Point::new(*delta, 0.0),
                Axis::Vertical => Point::new(0.0, *delta),
            };
            let text = rewrite_attributes(doc, ids, |node_info| {
                let inverse = node_info
                    .parent_ctm
                    .inverse()
                    .ok_or_else(|| invalid("transform", "singular ancestor transform"))?;
                let local = inverse.apply_vector(canvas_delta);
                let shift = format!("translate({},{})", fmt_num(local.x), fmt_num(local.y));
                let value = match node_info.transform {
                    Some(existing) if !existing.trim().is_empty() => {
                        format!("{shift} {}", existing.trim())
                    }
                    _ => shift,
                };
                Ok(("transform".to_string(), value))
            })?;
            parse_chart(&text)
        }
        EditCommand::InsertAnnotation { mark } => {
            let text = insert_annotation(doc, mark)?;
            parse_chart(&text)
        }
        EditCommand::ReplaceSource { svg } => parse_chart(svg),
        EditCommand::Batch { edits } => {
            let mut current = doc.clone();
            for e in edits {
                current = apply_edit(&current, e)?;
            }
            Ok(current)
        }
    }
}

fn invalid(attribute: &str, value: &str) -> ChartError {
    ChartError::InvalidAttributeValue {
        attribute: attribute.to_string(),
        value: value.to_string(),
    }
}

pub(crate) fn fmt_num(v: f64) -> String {
    // avoid "-0"
    format!("{}", v + 0.0)
}

fn parse_plain_number(value: &str) -> Option<f64> {
    let v = value.trim();
    let v = v.strip_suffix("px").unwrap_or(v);
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn validate_attribute(attribute: &str, value: &str) -> Result<(), ChartError> {
    let ok = match attribute {
        "id" => false,
        "fill" | "stroke" => {
            let v = value.trim();
            v == "none" || v.starts_with("url(") || parse_css_color(v).is_some()
        }
        "stroke-width" | "width" | "height" | "r" | "rx" | "ry" | "font-size" => {
            parse_plain_number(value).is_some_and(|x| x >= 0.0)
        }
        "opacity" | "fill-opacity" | "stroke-opacity" => {
            parse_plain_number(value).is_some_and(|x| (0.0..=1.0).contains(&x))
        }
        "x" | "y" | "cx" | "cy" | "x1" | "y1" | "x2" | "y2" => parse_plain_number(value).is_some(),
        "transform" => value.parse::<svgtypes::Transform>().is_ok(),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(attribute, value))
    }
}

fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct NodeInfo<'a> {
    parent_ctm: super::Affine,
    transform: Option<&'a str>,
}

/// Rewrite one attribute per targeted element. `value_for` yields the
/// attribute name and new value for each node.
fn rewrite_attributes<F>(doc: &ChartDocument, ids: &[String], mut value_for: F) -> Result<String, ChartError>
where
    F: FnMut(&NodeInfo) -> Result<(String, String), ChartError>,
{
    let src = doc.source_text.as_str();
    let xml = parse_xml(src)?;
    let walked = walk(&xml)?;
    let nodes: HashMap<&str, Node> = walked
        .visits
        .iter()
        .map(|v| (v.id.as_str(), v.node))
        .collect();

    let mut replacements: Vec<(Range<usize>, String)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            continue;
        }
        let node = *nodes
            .get(id.as_str())
            .ok_or_else(|| ChartError::UnknownElementId(id.clone()))?;
        let element = doc
            .element(id)
            .ok_or_else(|| ChartError::UnknownElementId(id.clone()))?;
        let info = NodeInfo {
            parent_ctm: element.parent_ctm,
            transform: node.attribute("transform"),
        };
        let (attribute, value) = value_for(&info)?;
        replacements.extend(attribute_replacements(src, node, &attribute, &value));
    }
    Ok(splice(src, replacements))
}

fn attribute_replacements(src: &str, node: Node, attribute: &str, value: &str) -> Vec<(Range<usize>, String)> {
    let mut out = Vec::new();
    let escaped = escape_attr(value);
    match node
        .attributes()
        .find(|a| a.namespace().is_none() && a.name() == attribute)
    {
        Some(attr) => out.push((attr.range_value(), escaped)),
        None => {
            let at = qname_end(src, node.range().start);
            out.push((at..at, format!(" {attribute}=\"{escaped}\"")));
        }
    }
    // an inline declaration of the same property would override the attribute
    if let Some(style) = node
        .attributes()
        .find(|a| a.namespace().is_none() && a.name() == "style")
    {
        let decls = parse_style(style.value());
        if decls.iter().any(|(k, _)| k == attribute) {
            let kept: Vec<String> = decls
                .into_iter()
                .filter(|(k, _)| k != attribute)
                .map(|(k, v)| format!("{k}:{v}"))
                .collect();
            out.push((style.range_value(), escape_attr(&kept.join(";"))));
        }
    }
    out
}

fn qname_end(src: &str, tag_start: usize) -> usize {
    let bytes = src.as_bytes();
    let mut i = tag_start + 1;
    while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b'\n' | b'\r' | b'/' | b'>') {
        i += 1;
    }
    i
}

fn splice(src: &str, mut replacements: Vec<(Range<usize>, String)>) -> String {
    replacements.sort_by(|a, b| b.0.start.cmp(&a.0.start).then(b.0.end.cmp(&a.0.end)));
    let mut text = src.to_string();
    for (range, with) in replacements {
        text.replace_range(range, &with);
    }
    text
}

fn insert_annotation(doc: &ChartDocument, mark: &AnnotationMark) -> Result<String, ChartError> {
    let to_user = doc
        .root_ctm
        .inverse()
        .ok_or_else(|| invalid("viewBox", "singular"))?;
    let scale = to_user.mean_scale();

    let mut n = 1;
    let id = loop {
        let candidate = format!("psight-annotation-{n}");
        if doc.element(&candidate).is_none() {
            break candidate;
        }
        n += 1;
    };

    let check_paint = |stroke: &str, width: f64| -> Result<(), ChartError> {
        validate_attribute("stroke", stroke)?;
        if !(width.is_finite() && width >= 0.0) {
            return Err(invalid("stroke-width", &width.to_string()));
        }
        Ok(())
    };

    let markup = match mark {
        AnnotationMark::Outline {
            bbox,
            stroke,
            stroke_width,
        } => {
            check_paint(stroke, *stroke_width)?;
            let a = to_user.apply(Point::new(bbox.left, bbox.top));
            let b = to_user.apply(Point::new(bbox.right, bbox.bottom));
            let user = BoundingBox::new(a.x, b.x, a.y, b.y);
            format!(
                "<rect id=\"{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
                fmt_num(user.left),
                fmt_num(user.top),
                fmt_num(user.width()),
                fmt_num(user.height()),
                escape_attr(stroke),
                fmt_num(stroke_width * scale)
            )
        }
        AnnotationMark::Connector {
            points,
            stroke,
            stroke_width,
        } => {
            check_paint(stroke, *stroke_width)?;
            if points.len() < 2 {
                return Err(invalid("points", "connector needs at least two points"));
            }
            let pts: Vec<String> = points
                .iter()
                .map(|p| {
                    let u = to_user.apply(*p);
                    format!("{},{}", fmt_num(u.x), fmt_num(u.y))
                })
                .collect();
            format!(
                "<polyline id=\"{id}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
                pts.join(" "),
                escape_attr(stroke),
                fmt_num(stroke_width * scale)
            )
        }
    };

    let src = doc.source_text.as_str();
    let xml = parse_xml(src)?;
    let root = xml.root_element();
    let range = root.range();
    let body = &src[range.clone()];
    let text = if body.ends_with("/>") {
        let qname = &src[range.start + 1..qname_end(src, range.start)];
        let at = range.end - 2;
        splice(src, vec![(at..range.end, format!(">{markup}</{qname}>"))])
    } else {
        let close = body
            .rfind("</")
            .ok_or_else(|| ChartError::MalformedSvg("root element has no end tag".into()))?;
        let at = range.start + close;
        splice(src, vec![(at..at, format!("{markup}\n"))])
    };
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Rgb;

    const BARS: &str = r#"<svg width="200" height="100">
  <g transform="translate(10,0)">
    <rect id="r1" x="0" y="10" width="20" height="80" fill="steelblue" style="fill: blue; stroke: none"/>
    <rect id="r2" x="30" y="30" width="20" height="60" fill="steelblue"/>
    <rect x="60" y="50" width="20" height="40"/>
  </g>
  <line id="axis" x1="0" y1="90" x2="200" y2="90" stroke="black"/>
</svg>"#;

    fn ids(doc: &ChartDocument) -> Vec<String> {
        doc.elements.iter().map(|e| e.id.clone()).collect()
    }

    #[test]
    fn set_attribute_overrides_inline_style() {
        let doc = parse_chart(BARS).unwrap();
        let edited = apply_edit(
            &doc,
            &EditCommand::SetAttribute {
                ids: vec!["r1".into()],
                attribute: "fill".into(),
                value: "rgb(234,0,0)".into(),
            },
        )
        .unwrap();
        assert_eq!(edited.element("r1").unwrap().style.fill.unwrap().rgb(), Rgb::new(234, 0, 0));
        assert!(edited.source_text.contains(r#"style="stroke:none""#));
        assert_eq!(ids(&edited), ids(&doc));
        // untouched elements keep their exact parse
        assert_eq!(edited.elements[1], doc.elements[1]);
        assert_eq!(edited.elements[3], doc.elements[3]);
    }

    #[test]
    fn set_attribute_inserts_missing_attribute() {
        let doc = parse_chart(BARS).unwrap();
        let generated = doc.elements[2].id.clone();
        assert_eq!(generated, "/svg/g[1]/rect[3]");
        let edited = apply_edit(
            &doc,
            &EditCommand::SetAttribute {
                ids: vec![generated.clone(), "r2".into()],
                attribute: "stroke-width".into(),
                value: "3".into(),
            },
        )
        .unwrap();
        assert_eq!(edited.element(&generated).unwrap().style.stroke_width, 3.0);
        assert_eq!(edited.element("r2").unwrap().style.stroke_width, 3.0);
        assert!(edited.source_text.contains(r#"<rect stroke-width="3" x="60""#));
    }

    #[test]
    fn batch_shift_moves_by_canvas_pixels() {
        let scaled = r#"<svg width="200" height="100"><g transform="scale(2)"><rect id="a" x="1" y="1" width="5" height="5" transform="rotate(0)"/><rect id="b" x="10" y="1" width="5" height="5"/></g></svg>"#;
        for src in [BARS, scaled] {
            let doc = parse_chart(src).unwrap();
            let rects: Vec<String> = doc
                .elements
                .iter()
                .filter(|e| e.kind == crate::chart::ElementKind::Rect)
                .map(|e| e.id.clone())
                .collect();
            let edited = apply_edit(
                &doc,
                &EditCommand::BatchShift {
                    ids: rects.clone(),
                    axis: Axis::Horizontal,
                    delta: 30.0,
                },
            )
            .unwrap();
            for id in &rects {
                let before = doc.element(id).unwrap().bbox;
                let after = edited.element(id).unwrap().bbox;
                assert!((after.left - before.left - 30.0).abs() < 1e-9);
                assert!((after.top - before.top).abs() < 1e-9);
            }
            assert_eq!(ids(&edited), ids(&doc));
        }
    }

    #[test]
    fn unknown_ids_and_bad_values() {
        let doc = parse_chart(BARS).unwrap();
        let err = apply_edit(
            &doc,
            &EditCommand::SetAttribute {
                ids: vec!["zzz".into()],
                attribute: "fill".into(),
                value: "red".into(),
            },
        );
        assert_eq!(err, Err(ChartError::UnknownElementId("zzz".into())));
        let err = apply_edit(
            &doc,
            &EditCommand::SetAttribute {
                ids: vec!["r1".into()],
                attribute: "stroke-width".into(),
                value: "-2".into(),
            },
        );
        assert!(matches!(err, Err(ChartError::InvalidAttributeValue { .. })));
    }

    #[test]
    fn annotations_append_new_ids() {
        let doc = parse_chart(r#"<svg viewBox="0 0 50 50" width="100" height="100"><rect id="a" width="10" height="10"/></svg>"#).unwrap();
        let edited = apply_edit(
            &doc,
            &EditCommand::InsertAnnotation {
                mark: AnnotationMark::Outline {
                    bbox: BoundingBox::new(-4.0, 24.0, -4.0, 24.0),
                    stroke: "rgb(234,0,0)".into(),
                    stroke_width: 2.0,
                },
            },
        )
        .unwrap();
        assert_eq!(ids(&edited), vec!["a", "psight-annotation-1"]);
        let mark = &edited.elements[1];
        assert_eq!(mark.bbox, BoundingBox::new(-4.0, 24.0, -4.0, 24.0));
        assert_eq!(mark.style.fill, None);
        assert!((mark.style.stroke_width - 2.0).abs() < 1e-12);

        let again = apply_edit(
            &edited,
            &EditCommand::InsertAnnotation {
                mark: AnnotationMark::Connector {
                    points: vec![Point::new(0.0, 0.0), Point::new(10.0, 10.0)],
                    stroke: "black".into(),
                    stroke_width: 1.0,
                },
            },
        )
        .unwrap();
        assert_eq!(again.elements.last().unwrap().id, "psight-annotation-2");
        assert_eq!(again.elements[..2], edited.elements[..]);
    }

    #[test]
    fn self_closing_root_gets_annotation() {
        let doc = parse_chart(r#"<svg width="10" height="10"/>"#).unwrap();
        let edited = apply_edit(
            &doc,
            &EditCommand::InsertAnnotation {
                mark: AnnotationMark::Connector {
                    points: vec![Point::new(0.0, 0.0), Point::new(5.0, 5.0)],
                    stroke: "black".into(),
                    stroke_width: 1.0,
                },
            },
        )
        .unwrap();
        assert_eq!(edited.elements.len(), 1);
    }

    #[test]
    fn batch_and_replace() {
        let doc = parse_chart(BARS).unwrap();
        let edited = apply_edit(
            &doc,
            &EditCommand::Batch {
                edits: vec![
                    EditCommand::SetAttribute {
                        ids: vec!["r2".into()],
                        attribute: "stroke".into(),
                        value: "rgb(0,100,0)".into(),
                    },
                    EditCommand::SetAttribute {
                        ids: vec!["r2".into()],
                        attribute: "stroke-width".into(),
                        value: "3".into(),
                    },
                ],
            },
        )
        .unwrap();
        let r2 = edited.element("r2").unwrap();
        assert_eq!(r2.style.stroke.unwrap().rgb(), Rgb::new(0, 100, 0));
        assert_eq!(r2.style.stroke_width, 3.0);

        let replaced = apply_edit(&doc, &EditCommand::ReplaceSource { svg: "<svg".into() });
        assert!(matches!(replaced, Err(ChartError::MalformedSvg(_))));
    }

    #[test]
    fn edit_command_json_shape() {
        let cmd = EditCommand::SetAttribute {
            ids: vec!["r1".into()],
            attribute: "stroke".into(),
            value: "rgb(234,0,0)".into(),
        };
        let json = serde_json::to_string(&cmd).unwrap();
        assert_eq!(
            json,
            r#"{"op":"set_attribute","ids":["r1"],"attribute":"stroke","value":"rgb(234,0,0)"}"#
        );
        assert_eq!(serde_json::from_str::<EditCommand>(&json).unwrap(), cmd);
    }
}
