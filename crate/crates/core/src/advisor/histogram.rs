use crate::effects::{ChartFeatureTable, Dim};
use serde::{Deserialize, Serialize};

pub const HISTOGRAM_BINS: usize = 10;

/// Counts of normalised values in equal bins over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionHistogram {
    pub dim: Dim,
    pub all: Vec<usize>,
    pub selection: Option<Vec<usize>>,
    /// Population variance of the selection's normalised values.
    pub selection_variance: Option<f64>,
}

fn bin(v: f64) -> usize {
    ((v * HISTOGRAM_BINS as f64).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// One histogram per dimension present on some element; rows lacking the
/// effect are left out of its counts.
pub fn effect_histograms(table: &ChartFeatureTable, selection: Option<&[usize]>) -> Vec<DimensionHistogram> {
    Dim::ALL
        .iter()
        .filter(|dim| table.vectors.iter().any(|v| v.presence_mask[dim.index()]))
        .map(|&dim| {
            let d = dim.index();
            let counts = |rows: &mut dyn Iterator<Item = usize>| {
                let mut h = vec![0; HISTOGRAM_BINS];
                let mut values = Vec::new();
                for i in rows {
                    let v = &table.vectors[i];
                    if v.presence_mask[d] {
                        h[bin(v.values[d])] += 1;
                        values.push(v.values[d]);
                    }
                }
                (h, values)
            };
            let (all, _) = counts(&mut (0..table.len()));
            let (selection, selection_variance) = match selection {
                Some(rows) => {
                    let (h, values) = counts(&mut rows.iter().copied());
                    let var = if values.is_empty() {
                        0.0
                    } else {
                        let n = values.len() as f64;
                        let mean = values.iter().sum::<f64>() / n;
                        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
                    };
                    (Some(h), Some(var))
                }
                None => (None, None),
            };
            DimensionHistogram {
                dim,
                all,
                selection,
                selection_variance,
            }
        })
        .collect()
}
