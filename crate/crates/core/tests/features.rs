use proptest::prelude::*;
use psight_core::chart::parse_chart;
use psight_core::color::hue_to_components;
use psight_core::effects::{extract_features, mds_embed, Dim, DIM_COUNT};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn bars6_matches_reference_table() {
    let doc = parse_chart(&fixture("bars6.svg")).unwrap();
    let table = extract_features(&doc).unwrap();
    let golden = fixture("bars6_features.csv");
    let mut reader = csv::Reader::from_reader(golden.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[1..], psight_core::effects::DIMENSION_NAMES.map(String::from));

    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), table.len());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(&row[0], table.element_ids[i]);
        let v = &table.vectors[i];
        for d in 0..DIM_COUNT {
            let cell = &row[d + 1];
            if cell.is_empty() {
                assert!(!v.presence_mask[d], "{} {} should be masked", &row[0], header[d + 1]);
                assert_eq!(v.values[d], 0.0);
            } else {
                let want: f64 = cell.parse().unwrap();
                assert!(v.presence_mask[d]);
                assert!(
                    (v.values[d] - want).abs() < 1e-9,
                    "{} {}: got {} want {want}",
                    &row[0],
                    header[d + 1],
                    v.values[d]
                );
            }
        }
    }
}

#[test]
fn bars6_contact_graph() {
    let doc = parse_chart(&fixture("bars6.svg")).unwrap();
    let t = extract_features(&doc).unwrap();
    let c = &t.relations.contact;
    assert_eq!(c[0][1], 1);
    assert_eq!(c[1][2], 1);
    assert_eq!(c[0][2], 0);
    assert_eq!(c[3][4], 1);
    assert!(c[5].iter().all(|&x| x == 0));
}

#[derive(Debug, Clone)]
struct Shape {
    x: i32,
    y: i32,
    w: u8,
    h: u8,
    hue: u16,
    circle: bool,
    stroke: bool,
}

fn shape() -> impl Strategy<Value = Shape> {
    (0..300i32, 0..200i32, 1..60u8, 1..60u8, 0..360u16, any::<bool>(), any::<bool>()).prop_map(
        |(x, y, w, h, hue, circle, stroke)| Shape {
            x,
            y,
            w,
            h,
            hue,
            circle,
            stroke,
        },
    )
}

fn render(shapes: &[Shape], dx: i32, dy: i32) -> String {
    let mut svg = String::from(r#"<svg xmlns="http://www.w3.org/2000/svg" width="400" height="300">"#);
    for s in shapes {
        let stroke = if s.stroke { r#" stroke="black" stroke-width="2""# } else { "" };
        let fill = format!("hsl({}, 60%, 50%)", s.hue);
        if s.circle {
            svg.push_str(&format!(
                r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"{stroke}/>"#,
                s.x + dx,
                s.y + dy,
                s.w / 2 + 1
            ));
        } else {
            svg.push_str(&format!(
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"{stroke}/>"#,
                s.x + dx,
                s.y + dy,
                s.w,
                s.h
            ));
        }
    }
    svg.push_str("</svg>");
    svg
}

const POSITION_RAW: [Dim; 6] = [
    Dim::CentroidX,
    Dim::CentroidY,
    Dim::BboxLeft,
    Dim::BboxRight,
    Dim::BboxTop,
    Dim::BboxBottom,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_values_in_unit_range(shapes in prop::collection::vec(shape(), 1..12)) {
        let doc = parse_chart(&render(&shapes, 0, 0)).unwrap();
        let t = extract_features(&doc).unwrap();
        for v in &t.vectors {
            for d in 0..DIM_COUNT {
                prop_assert!((0.0..=1.0).contains(&v.values[d]));
                if !v.presence_mask[d] {
                    prop_assert_eq!(v.values[d], 0.0);
                }
            }
        }
    }

    #[test]
    fn extraction_is_deterministic(shapes in prop::collection::vec(shape(), 1..12)) {
        let doc = parse_chart(&render(&shapes, 0, 0)).unwrap();
        let a = extract_features(&doc).unwrap();
        let b = extract_features(&parse_chart(&render(&shapes, 0, 0)).unwrap()).unwrap();
        for (x, y) in a.vectors.iter().zip(&b.vectors) {
            for d in 0..DIM_COUNT {
                prop_assert_eq!(x.values[d].to_bits(), y.values[d].to_bits());
            }
        }
    }

    #[test]
    fn translation_equivariance(
        shapes in prop::collection::vec(shape(), 1..10),
        dx in -50i32..50,
        dy in -50i32..50,
    ) {
        let a = extract_features(&parse_chart(&render(&shapes, 0, 0)).unwrap()).unwrap();
        let b = extract_features(&parse_chart(&render(&shapes, dx, dy)).unwrap()).unwrap();
        prop_assert_eq!(&a.relations, &b.relations);
        for (ra, rb) in a.raw.iter().zip(&b.raw) {
            for d in 0..13 {
                prop_assert_eq!(ra.values[d], rb.values[d]);
            }
            for dim in [Dim::MdsContact1, Dim::MdsContact2, Dim::MdsRegion1, Dim::MdsRegion2] {
                prop_assert_eq!(ra.values[dim.index()], rb.values[dim.index()]);
            }
            for dim in POSITION_RAW {
                let shift = if matches!(dim, Dim::CentroidX | Dim::BboxLeft | Dim::BboxRight) { dx } else { dy };
                prop_assert!((rb.values[dim.index()] - ra.values[dim.index()] - f64::from(shift)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hue_has_no_wraparound_cliff(eps in 1e-6f64..1.0) {
        let (s0, c0) = hue_to_components(0.0);
        let (s1, c1) = hue_to_components(360.0 - eps);
        let bound = eps * std::f64::consts::PI / 180.0 + 1e-12;
        prop_assert!((s0 - s1).abs() <= bound);
        prop_assert!((c0 - c1).abs() <= bound);
    }

    #[test]
    fn mds_reproduces_planar_distances(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..8)) {
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| f64::hypot(a.0 - b.0, a.1 - b.1)).collect())
            .collect();
        let e = mds_embed(&d, 2).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                let got = f64::hypot(e.coords[i][0] - e.coords[j][0], e.coords[i][1] - e.coords[j][1]);
                prop_assert!((got - d[i][j]).abs() < 1e-6, "{} vs {}", got, d[i][j]);
            }
        }
    }
}
