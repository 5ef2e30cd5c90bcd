use super::{
    contact_distances, extract_appearance, mds_embed, region_distances, relationship_matrices_for, Dim,
    EffectVector, FeatureError, RelationshipMatrices, APPEARANCE_DIMS, DIMENSION_NAMES, DIM_COUNT,
};
use crate::chart::{ChartDocument, GraphicalElement, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io;

/// A spread smaller than this (relative to the magnitude) counts as constant,
/// so float noise in otherwise equal values is not stretched to `[0, 1]`.
const CONSTANT_SPREAD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMethod {
    /// sin/cos component, fixed range `[-1, 1]`.
    Periodic,
    CanvasWidth,
    CanvasHeight,
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimNormalization {
    pub dim: Dim,
    pub method: NormalizationMethod,
    pub min: f64,
    pub max: f64,
    /// Every present value was equal; they all map to 0.5.
    pub constant: bool,
}

impl DimNormalization {
    pub fn apply(&self, raw: f64) -> f64 {
        if self.constant {
            return 0.5;
        }
        ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartFeatureTable {
    pub element_ids: Vec<String>,
    /// Normalised vectors, one per id.
    pub vectors: Vec<EffectVector>,
    /// Same layout before normalisation.
    pub raw: Vec<EffectVector>,
    pub normalization_record: Vec<DimNormalization>,
    pub relations: RelationshipMatrices,
    /// Canvas-space centroids.
    pub centroids: Vec<Point>,
    pub canvas_width: f64,
    pub canvas_height: f64,
}

impl ChartFeatureTable {
    pub fn len(&self) -> usize {
        self.element_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.element_ids.iter().position(|e| e == id)
    }

    pub fn vector(&self, id: &str) -> Option<&EffectVector> {
        self.index_of(id).map(|i| &self.vectors[i])
    }

    pub fn canvas_diagonal(&self) -> f64 {
        self.canvas_width.hypot(self.canvas_height)
    }

    /// CSV with an `element_id` column then one column per dimension;
    /// masked cells are left empty.
    pub fn write_csv<W: io::Write>(&self, writer: W, raw: bool) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(std::iter::once("element_id").chain(DIMENSION_NAMES))?;
        let rows = if raw { &self.raw } else { &self.vectors };
        for (id, v) in self.element_ids.iter().zip(rows) {
            let mut record = vec![id.clone()];
            record.extend((0..DIM_COUNT).map(|d| {
                if v.presence_mask[d] {
                    v.values[d].to_string()
                } else {
                    String::new()
                }
            }));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self, raw: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, raw).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub fn extract_features(doc: &ChartDocument) -> Result<ChartFeatureTable, FeatureError> {
    extract_features_scoped::<&str>(doc, &[])
}

/// Features over every element except `excluded`. Normalisation ranges and
/// relationship matrices are computed over the remaining scope only.
pub fn extract_features_scoped<S: AsRef<str>>(
    doc: &ChartDocument,
    excluded: &[S],
) -> Result<ChartFeatureTable, FeatureError> {
    let mut skip = HashSet::new();
    for id in excluded {
        let id = id.as_ref();
        if doc.element(id).is_none() {
            return Err(FeatureError::UnknownElementId(id.to_string()));
        }
        skip.insert(id);
    }
    let scope: Vec<&GraphicalElement> = doc
        .elements
        .iter()
        .filter(|e| !skip.contains(e.id.as_str()))
        .collect();
    if scope.is_empty() {
        return Err(FeatureError::EmptyChart);
    }

    let relations = relationship_matrices_for(&scope, 0.01 * doc.canvas_diagonal());
    let contact_mds = mds_embed(&contact_distances(&relations.contact), 2)?;
    let region_mds = mds_embed(&region_distances(&relations.region), 2)?;

    let raw: Vec<EffectVector> = scope
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (appearance, mask) = extract_appearance(e, doc);
            let mut values = [0.0; DIM_COUNT];
            let mut presence_mask = [true; DIM_COUNT];
            values[..APPEARANCE_DIMS].copy_from_slice(&appearance);
            presence_mask[..APPEARANCE_DIMS].copy_from_slice(&mask);
            let c = e.centroid();
            let b = e.bbox;
            for (dim, v) in [
                (Dim::CentroidX, c.x),
                (Dim::CentroidY, c.y),
                (Dim::BboxLeft, b.left),
                (Dim::BboxRight, b.right),
                (Dim::BboxTop, b.top),
                (Dim::BboxBottom, b.bottom),
                (Dim::MdsContact1, contact_mds.coords[i][0]),
                (Dim::MdsContact2, contact_mds.coords[i][1]),
                (Dim::MdsRegion1, region_mds.coords[i][0]),
                (Dim::MdsRegion2, region_mds.coords[i][1]),
            ] {
                values[dim.index()] = v;
            }
            EffectVector {
                values,
                presence_mask,
            }
        })
        .collect();

    let normalization_record: Vec<DimNormalization> = Dim::ALL
        .iter()
        .map(|&dim| normalization_for(dim, &raw, doc))
        .collect();

    let vectors = raw
        .iter()
        .map(|r| {
            let mut values = [0.0; DIM_COUNT];
            for (d, norm) in normalization_record.iter().enumerate() {
                if r.presence_mask[d] {
                    values[d] = norm.apply(r.values[d]);
                }
            }
            EffectVector {
                values,
                presence_mask: r.presence_mask,
            }
        })
        .collect();

    Ok(ChartFeatureTable {
        element_ids: scope.iter().map(|e| e.id.clone()).collect(),
        vectors,
        raw,
        normalization_record,
        relations,
        centroids: scope.iter().map(|e| e.centroid()).collect(),
        canvas_width: doc.canvas_width,
        canvas_height: doc.canvas_height,
    })
}

fn normalization_for(dim: Dim, raw: &[EffectVector], doc: &ChartDocument) -> DimNormalization {
    let method = dim.normalization();
    let fixed = |min: f64, max: f64| DimNormalization {
        dim,
        method,
        min,
        max,
        constant: max <= min,
    };
    match method {
        NormalizationMethod::Periodic => fixed(-1.0, 1.0),
        NormalizationMethod::CanvasWidth => fixed(0.0, doc.canvas_width),
        NormalizationMethod::CanvasHeight => fixed(0.0, doc.canvas_height),
        NormalizationMethod::MinMax => {
            let present = raw
                .iter()
                .filter(|r| r.presence_mask[dim.index()])
                .map(|r| r.values[dim.index()]);
            let (min, max) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            if min > max {
                return DimNormalization {
                    dim,
                    method,
                    min: 0.0,
                    max: 0.0,
                    constant: true,
                };
            }
            let scale = 1f64.max(min.abs()).max(max.abs());
            DimNormalization {
                dim,
                method,
                min,
                max,
                constant: max - min <= CONSTANT_SPREAD * scale,
            }
        }
    }
}
