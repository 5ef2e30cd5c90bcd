use super::{dot, weighted, ModelError, Params, PerceptionModel};
use crate::annotations::{Polarity, TrainingPair};
use crate::effects::ChartFeatureTable;
use std::collections::HashMap;

const NORM_FLOOR: f64 = 1e-12;

/// Training pairs resolved to input rows; shared elements appear once.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub inputs: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize, Polarity)>,
}

impl PairBatch {
    pub fn new(inputs: Vec<Vec<f64>>, pairs: Vec<(usize, usize, Polarity)>) -> Self {
        PairBatch { inputs, pairs }
    }

    pub fn from_pairs(
        pairs: &[TrainingPair],
        features: &HashMap<String, ChartFeatureTable>,
    ) -> Result<Self, ModelError> {
        let mut rows: HashMap<(&str, &str), usize> = HashMap::new();
        let mut inputs = Vec::new();
        let mut resolved = Vec::with_capacity(pairs.len());
        for p in pairs {
            let table = features
                .get(&p.chart_id)
                .ok_or_else(|| ModelError::MissingFeatures(p.chart_id.clone()))?;
            let mut ends = [0usize; 2];
            for (slot, id) in ends.iter_mut().zip([p.element_a.as_str(), p.element_b.as_str()]) {
                let v = table.vector(id).ok_or_else(|| ModelError::UnknownElement {
                    chart: p.chart_id.clone(),
                    element: id.to_string(),
                })?;
                *slot = *rows.entry((p.chart_id.as_str(), id)).or_insert_with(|| {
                    inputs.push(v.masked_values().to_vec());
                    inputs.len() - 1
                });
            }
            resolved.push((ends[0], ends[1], p.polarity));
        }
        Ok(PairBatch {
            inputs,
            pairs: resolved,
        })
    }

    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.2 == Polarity::Positive).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub embed_positive: f64,
    pub embed_negative: f64,
    pub aux_positive: f64,
    pub aux_negative: f64,
}

/// Cosine similarity, 0 when either vector is (numerically) zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na < NORM_FLOOR || nb < NORM_FLOOR {
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// Cosine plus its gradients with respect to both arguments.
fn cosine_grad(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na < NORM_FLOOR || nb < NORM_FLOOR {
        return (0.0, vec![0.0; a.len()], vec![0.0; b.len()]);
    }
    let c = dot(a, b) / (na * nb);
    let ga = a.iter().zip(b).map(|(x, y)| y / (na * nb) - c * x / (na * na)).collect();
    let gb = a.iter().zip(b).map(|(x, y)| x / (na * nb) - c * y / (nb * nb)).collect();
    (c, ga, gb)
}

/// Pairwise cosine-margin loss on embeddings plus `aux_weight` times the same
/// loss on weighted-feature consistency, with exact parameter gradients.
pub fn loss_and_gradients(
    model: &PerceptionModel,
    batch: &PairBatch,
) -> Result<(LossBreakdown, Params), ModelError> {
    if batch.pairs.is_empty() {
        return Err(ModelError::EmptyPairSet);
    }
    let cfg = &model.config;
    for x in &batch.inputs {
        if x.len() != cfg.input_dim {
            return Err(ModelError::DimensionMismatch {
                found: x.len(),
                expected: cfg.input_dim,
            });
        }
    }
    let acts: Vec<_> = batch.inputs.iter().map(|x| model.activate(x)).collect();
    let weighted_inputs: Vec<Vec<f64>> = acts
        .iter()
        .zip(&batch.inputs)
        .map(|(a, x)| weighted(&a.weights, x))
        .collect();

    let n_pos = batch.positives();
    let n_neg = batch.pairs.len() - n_pos;
    let mut loss = LossBreakdown {
        total: 0.0,
        embed_positive: 0.0,
        embed_negative: 0.0,
        aux_positive: 0.0,
        aux_negative: 0.0,
    };
    // gradients of the loss with respect to each row's embedding and weighted input
    let mut g_embed = vec![vec![0.0; cfg.embed_dim]; batch.inputs.len()];
    let mut g_weighted = vec![vec![0.0; cfg.input_dim]; batch.inputs.len()];

    for &(i, j, polarity) in &batch.pairs {
        let (ce, gei, gej) = cosine_grad(&acts[i].embedding, &acts[j].embedding);
        let (cu, gui, guj) = cosine_grad(&weighted_inputs[i], &weighted_inputs[j]);
        let (de, du) = match polarity {
            Polarity::Positive => {
                let scale = 1.0 / n_pos as f64;
                loss.embed_positive += (1.0 - ce) * scale;
                loss.aux_positive += (1.0 - cu) * scale;
                (-scale, -scale)
            }
            Polarity::Negative => {
                let scale = 1.0 / n_neg as f64;
                let mut de = 0.0;
                let mut du = 0.0;
                if ce > cfg.margin {
                    loss.embed_negative += (ce - cfg.margin) * scale;
                    de = scale;
                }
                if cu > cfg.margin {
                    loss.aux_negative += (cu - cfg.margin) * scale;
                    du = scale;
                }
                (de, du)
            }
        };
        let du = du * cfg.aux_weight;
        for k in 0..cfg.embed_dim {
            g_embed[i][k] += de * gei[k];
            g_embed[j][k] += de * gej[k];
        }
        for k in 0..cfg.input_dim {
            g_weighted[i][k] += du * gui[k];
            g_weighted[j][k] += du * guj[k];
        }
    }
    loss.total = loss.embed_positive
        + loss.embed_negative
        + cfg.aux_weight * (loss.aux_positive + loss.aux_negative);

    let mut grads = Params::zeros(cfg);
    let (ni, nh) = (cfg.input_dim, cfg.hidden_dim);
    for (row, x) in batch.inputs.iter().enumerate() {
        let a = &acts[row];
        let ge = &g_embed[row];
        if ge.iter().any(|g| *g != 0.0) {
            let mut g_hidden = vec![0.0; nh];
            for (r, g) in ge.iter().enumerate() {
                grads.b2[r] += g;
                for (k, h) in a.hidden.iter().enumerate() {
                    grads.w2[r * nh + k] += g * h;
                    g_hidden[k] += g * model.params.w2[r * nh + k];
                }
            }
            for (r, gh) in g_hidden.iter().enumerate() {
                let gz = gh * (1.0 - a.hidden[r] * a.hidden[r]);
                grads.b1[r] += gz;
                for (k, xk) in x.iter().enumerate() {
                    grads.w1[r * ni + k] += gz * xk;
                }
            }
        }
        let gu = &g_weighted[row];
        if gu.iter().any(|g| *g != 0.0) {
            for r in 0..ni {
                let w = a.weights[r];
                // u_r = |w_r| x_r and w_r = logistic(z_r)
                let gz = gu[r] * x[r] * w.signum() * w * (1.0 - w);
                grads.bh[r] += gz;
                for (k, xk) in x.iter().enumerate() {
                    grads.wh[r * ni + k] += gz * xk;
                }
            }
        }
    }
    Ok((loss, grads))
}

/// Loss and gradients for annotation pairs looked up in per-chart feature tables.
pub fn contrastive_loss(
    model: &PerceptionModel,
    pairs: &[TrainingPair],
    features: &HashMap<String, ChartFeatureTable>,
) -> Result<(f64, Params), ModelError> {
    let batch = PairBatch::from_pairs(pairs, features)?;
    let (loss, grads) = loss_and_gradients(model, &batch)?;
    Ok((loss.total, grads))
}

#[cfg(test)]
mod tests {
    use super::super::ModelConfig;
    use super::*;

    fn micro() -> (PerceptionModel, PairBatch) {
        let config = ModelConfig {
            input_dim: 4,
            hidden_dim: 3,
            embed_dim: 2,
            n_subreps: 1,
            margin: 0.1,
            aux_weight: 0.5,
            learning_rate: 0.1,
            epochs: 1,
            seed: 5,
        };
        let model = PerceptionModel::initialize(&ModelConfig {
            seed: 42,
            ..config.clone()
        })
        .unwrap();
        // scale up so both hinges are active and gradients are not tiny
        let mut params = model.params.clone();
        for a in params.arrays_mut() {
            a.iter_mut().for_each(|v| *v *= 10.0);
        }
        let model = PerceptionModel::from_parts(config, params).unwrap();
        let batch = PairBatch::new(
            vec![
                vec![0.9, 0.1, 0.4, 0.0],
                vec![0.8, 0.3, 0.5, 0.2],
                vec![0.1, 0.7, 0.6, 0.9],
            ],
            vec![(0, 1, Polarity::Positive), (0, 2, Polarity::Negative)],
        );
        (model, batch)
    }

    #[test]
    fn gradients_match_central_differences() {
        let (model, batch) = micro();
        let (_, grads) = loss_and_gradients(&model, &batch).unwrap();
        let h = 1e-5;
        for (k, analytic) in grads.arrays().iter().enumerate() {
            for idx in 0..analytic.len() {
                let mut plus = model.clone();
                plus.params.arrays_mut()[k][idx] += h;
                let mut minus = model.clone();
                minus.params.arrays_mut()[k][idx] -= h;
                let lp = loss_and_gradients(&plus, &batch).unwrap().0.total;
                let lm = loss_and_gradients(&minus, &batch).unwrap().0.total;
                let numeric = (lp - lm) / (2.0 * h);
                let a = analytic[idx];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-4, "array {k}[{idx}]: analytic {a}, numeric {numeric}");
            }
        }
    }

    #[test]
    fn identical_positive_pair_has_no_embedding_loss() {
        let (model, _) = micro();
        let x = vec![0.2, 0.4, 0.6, 0.8];
        let batch = PairBatch::new(vec![x.clone(), x], vec![(0, 1, Polarity::Positive)]);
        let (loss, _) = loss_and_gradients(&model, &batch).unwrap();
        assert!(loss.embed_positive.abs() < 1e-12);
        assert!(loss.aux_positive.abs() < 1e-12);
    }

    #[test]
    fn inactive_hinge_contributes_nothing() {
        let (mut model, _) = micro();
        model.config.margin = 1.0;
        let batch = PairBatch::new(
            vec![vec![0.9, 0.1, 0.4, 0.0], vec![0.1, 0.7, 0.6, 0.9]],
            vec![(0, 1, Polarity::Negative)],
        );
        let (loss, grads) = loss_and_gradients(&model, &batch).unwrap();
        assert_eq!(loss.total, 0.0);
        assert!(grads.arrays().iter().all(|a| a.iter().all(|g| *g == 0.0)));
    }

    #[test]
    fn empty_batch_is_rejected() {
        let (model, _) = micro();
        assert_eq!(
            loss_and_gradients(&model, &PairBatch::new(vec![], vec![])).unwrap_err(),
            ModelError::EmptyPairSet
        );
    }
}
