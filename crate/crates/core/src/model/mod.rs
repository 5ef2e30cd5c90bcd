//! The perception model: an encoder from effect vectors to embeddings whose
//! contiguous slices act as sub-representations, and a head that yields a
//! per-element perceptual weight for each effect dimension.

mod io;
mod loss;
mod train;

pub use io::{load_model, save_model, FORMAT_VERSION, MAGIC};
pub use loss::{contrastive_loss, cosine, loss_and_gradients, LossBreakdown, PairBatch};
pub use train::{train, train_batch, TrainingRun};

use crate::effects::{ChartFeatureTable, EffectVector, DIM_COUNT};
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("no training pairs")]
    EmptyPairSet,
    #[error("training needs at least one positive pair")]
    NoPositivePairs,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("no feature table for chart `{0}`")]
    MissingFeatures(String),
    #[error("chart `{chart}` has no featured element `{element}`")]
    UnknownElement { chart: String, element: String },
    #[error("input has {found} values, model expects {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("model file I/O: {0}")]
    Io(String),
}

/// Missing fields in a config file take their default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub n_subreps: usize,
    pub margin: f64,
    /// Weight of the auxiliary term on the weighted-feature consistency.
    pub aux_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_dim: DIM_COUNT,
            hidden_dim: 64,
            embed_dim: 32,
            n_subreps: 4,
            margin: 0.5,
            aux_weight: 0.5,
            learning_rate: 1e-2,
            epochs: 500,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if self.input_dim == 0 || self.hidden_dim == 0 || self.embed_dim == 0 || self.n_subreps == 0 {
            return bad("dimensions must be positive");
        }
        if self.embed_dim % self.n_subreps != 0 {
            return bad("embed_dim must be divisible by n_subreps");
        }
        for (name, v) in [
            ("margin", self.margin),
            ("aux_weight", self.aux_weight),
            ("learning_rate", self.learning_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidConfig(format!("{name} must be a positive number")));
            }
        }
        Ok(())
    }

    pub fn subrep_dim(&self) -> usize {
        self.embed_dim / self.n_subreps
    }
}

/// All trainable parameters. Matrices are row-major with one row per output:
/// `w1` is hidden×input, `w2` embed×hidden, `wh` input×input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub wh: Vec<f64>,
    pub bh: Vec<f64>,
}

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        let [a, b, c, d, e, f] = Self::shapes(config);
        Params {
            w1: vec![0.0; a],
            b1: vec![0.0; b],
            w2: vec![0.0; c],
            b2: vec![0.0; d],
            wh: vec![0.0; e],
            bh: vec![0.0; f],
        }
    }

    /// Lengths of `w1, b1, w2, b2, wh, bh`.
    pub fn shapes(config: &ModelConfig) -> [usize; 6] {
        let (i, h, e) = (config.input_dim, config.hidden_dim, config.embed_dim);
        [h * i, h, e * h, e, i * i, i]
    }

    pub fn arrays(&self) -> [&[f64]; 6] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.wh, &self.bh]
    }

    pub fn arrays_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2, &mut self.wh, &mut self.bh]
    }

    pub fn len(&self) -> usize {
        self.arrays().iter().map(|a| a.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        for (dst, src) in self.arrays_mut().into_iter().zip(other.arrays()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.arrays().iter().all(|a| a.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRepresentation {
    pub embedding: Vec<f64>,
    /// Perceptual weight per effect dimension, in (0, 1).
    pub weights: Vec<f64>,
    #[serde(skip)]
    subrep_dim: usize,
}

impl ElementRepresentation {
    pub fn subreps(&self) -> impl Iterator<Item = &[f64]> {
        self.embedding.chunks(self.subrep_dim)
    }

    pub fn subrep(&self, k: usize) -> &[f64] {
        &self.embedding[k * self.subrep_dim..(k + 1) * self.subrep_dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionModel {
    pub config: ModelConfig,
    pub params: Params,
}

/// Intermediate activations kept for backpropagation.
pub(crate) struct Activations {
    pub hidden: Vec<f64>,
    pub embedding: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PerceptionModel {
    /// Seeded uniform(−0.1, 0.1) initialisation, parameters drawn in declared order.
    pub fn initialize(config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let dist = Uniform::new(-0.1, 0.1).expect("valid range");
        let mut params = Params::zeros(config);
        for array in params.arrays_mut() {
            for v in array.iter_mut() {
                *v = dist.sample(&mut rng);
            }
        }
        Ok(PerceptionModel {
            config: config.clone(),
            params,
        })
    }

    pub fn from_parts(config: ModelConfig, params: Params) -> Result<Self, ModelError> {
        config.validate()?;
        let want = Params::shapes(&config);
        for (k, (array, n)) in params.arrays().iter().zip(want).enumerate() {
            if array.len() != n {
                return Err(ModelError::InvalidConfig(format!(
                    "parameter array {k} has {} values, expected {n}",
                    array.len()
                )));
            }
        }
        if !params.all_finite() {
            return Err(ModelError::InvalidConfig("parameters must be finite".into()));
        }
        Ok(PerceptionModel { config, params })
    }

    pub(crate) fn activate(&self, x: &[f64]) -> Activations {
        let c = &self.config;
        let p = &self.params;
        let hidden: Vec<f64> = (0..c.hidden_dim)
            .map(|r| (p.b1[r] + dot(&p.w1[r * c.input_dim..(r + 1) * c.input_dim], x)).tanh())
            .collect();
        let embedding = (0..c.embed_dim)
            .map(|r| p.b2[r] + dot(&p.w2[r * c.hidden_dim..(r + 1) * c.hidden_dim], &hidden))
            .collect();
        let weights = (0..c.input_dim)
            .map(|r| logistic(p.bh[r] + dot(&p.wh[r * c.input_dim..(r + 1) * c.input_dim], x)))
            .collect();
        Activations {
            hidden,
            embedding,
            weights,
        }
    }

    /// Representation of a raw input that already has masked dims zeroed.
    pub fn forward_values(&self, x: &[f64]) -> Result<ElementRepresentation, ModelError> {
        if x.len() != self.config.input_dim {
            return Err(ModelError::DimensionMismatch {
                found: x.len(),
                expected: self.config.input_dim,
            });
        }
        let a = self.activate(x);
        Ok(ElementRepresentation {
            embedding: a.embedding,
            weights: a.weights,
            subrep_dim: self.config.subrep_dim(),
        })
    }

    pub fn forward(&self, v: &EffectVector) -> Result<ElementRepresentation, ModelError> {
        self.forward_values(&v.masked_values())
    }

    /// Representations for every row of a feature table.
    pub fn represent(&self, table: &ChartFeatureTable) -> Result<Vec<ElementRepresentation>, ModelError> {
        table.vectors.iter().map(|v| self.forward(v)).collect()
    }

    /// Weighted-feature consistency between two featured elements.
    pub fn consistency(&self, table: &ChartFeatureTable, i: usize, j: usize) -> Result<f64, ModelError> {
        let ri = self.forward(&table.vectors[i])?;
        let rj = self.forward(&table.vectors[j])?;
        Ok(consistency(
            &ri.weights,
            &table.vectors[i].masked_values(),
            &rj.weights,
            &table.vectors[j].masked_values(),
        ))
    }
}

/// `cos(|w_i| ⊙ v_i, |w_j| ⊙ v_j)`, 0 if either weighted vector vanishes.
pub fn consistency(w_i: &[f64], v_i: &[f64], w_j: &[f64], v_j: &[f64]) -> f64 {
    let a = weighted(w_i, v_i);
    let b = weighted(w_j, v_j);
    cosine(&a, &b)
}

pub(crate) fn weighted(w: &[f64], v: &[f64]) -> Vec<f64> {
    w.iter().zip(v).map(|(w, v)| w.abs() * v).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_emit_biases() {
        let config = ModelConfig::default();
        let mut params = Params::zeros(&config);
        params.b2.iter_mut().enumerate().for_each(|(k, b)| *b = k as f64 * 0.1);
        params.bh.iter_mut().enumerate().for_each(|(k, b)| *b = k as f64 - 11.0);
        let model = PerceptionModel::from_parts(config, params.clone()).unwrap();
        let r = model.forward_values(&[0.7; DIM_COUNT]).unwrap();
        assert_eq!(r.embedding, params.b2);
        for (w, b) in r.weights.iter().zip(&params.bh) {
            assert_eq!(*w, logistic(*b));
        }
        assert_eq!(r.subreps().count(), 4);
        assert_eq!(r.subreps().flatten().copied().collect::<Vec<_>>(), r.embedding);
        assert_eq!(r.subrep(1), &r.embedding[8..16]);
    }

    #[test]
    fn consistency_examples() {
        let ones = [1.0; 3];
        assert!((consistency(&ones, &[1.0, 0.0, 0.0], &ones, &[1.0, 1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(consistency(&ones, &[1.0, 0.0, 0.0], &ones, &[0.0, 1.0, 0.0]), 0.0);
        assert_eq!(consistency(&ones, &[0.0; 3], &ones, &[1.0, 0.0, 0.0]), 0.0);
        assert!((consistency(&[0.3, 0.2, 0.9], &[0.5, 0.1, 0.4], &[0.3, 0.2, 0.9], &[0.5, 0.1, 0.4]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initialisation_is_seeded_and_bounded() {
        let config = ModelConfig::default();
        let a = PerceptionModel::initialize(&config).unwrap();
        let b = PerceptionModel::initialize(&config).unwrap();
        assert_eq!(a, b);
        assert!(a.params.arrays().iter().all(|x| x.iter().all(|v| v.abs() < 0.1)));
        let other = PerceptionModel::initialize(&ModelConfig { seed: 1, ..config }).unwrap();
        assert_ne!(a.params, other.params);
    }

    #[test]
    fn config_validation() {
        let bad = ModelConfig {
            n_subreps: 5,
            ..ModelConfig::default()
        };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidConfig(_))));
        let bad = ModelConfig {
            margin: 0.0,
            ..ModelConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(ModelConfig::default().validate().is_ok());
    }
}
