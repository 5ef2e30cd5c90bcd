use super::{loss_and_gradients, ModelConfig, ModelError, PairBatch, PerceptionModel};
use crate::annotations::TrainingPair;
use crate::effects::ChartFeatureTable;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub model: PerceptionModel,
    /// Loss at the start of each epoch, before that epoch's update.
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from the seeded initialisation.
pub fn train(
    config: &ModelConfig,
    pairs: &[TrainingPair],
    features: &HashMap<String, ChartFeatureTable>,
) -> Result<TrainingRun, ModelError> {
    let batch = PairBatch::from_pairs(pairs, features)?;
    train_batch(config, &batch)
}

pub fn train_batch(config: &ModelConfig, batch: &PairBatch) -> Result<TrainingRun, ModelError> {
    let mut model = PerceptionModel::initialize(config)?;
    if batch.positives() == 0 {
        return Err(ModelError::NoPositivePairs);
    }
    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grads) = loss_and_gradients(&model, batch)?;
        if !loss.total.is_finite() || !grads.all_finite() {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        losses.push(loss.total);
        model.params.add_scaled(&grads, -config.learning_rate);
    }
    Ok(TrainingRun { model, losses })
}
