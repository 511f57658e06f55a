//! Reference classifier: hashed character n-grams into a logistic model.
//!
//! The pipeline's training and mining stages only need the surface here
//! (featurize / train / predict / save / load), so a heavier architecture
//! can drop in behind the same interface later. Character 3–5-grams are
//! hashed into `2^d` buckets (FNV-1a, unsigned collisions), feature vectors
//! are L2-normalized in the scoring path, and training is seeded mini-batch
//! SGD on class-weighted logistic loss with checkpoint selection by
//! validation loss.

use crate::corpus::{Collection, Label};
use crate::hashing::{derive_seed, fnv1a_64};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

const MODEL_FILE_VERSION: u32 = 1;

/// Character n-gram hashing parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Hashing dimension exponent: indices live in `[0, 2^dim_exponent)`.
    pub dim_exponent: u8,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            dim_exponent: 18,
            ngram_min: 3,
            ngram_max: 5,
        }
    }
}

impl FeatureConfig {
    pub fn dims(&self) -> usize {
        1usize << self.dim_exponent
    }
}

/// Sparse hashed n-gram counts, sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(u32, u32)>,
}

impl FeatureVector {
    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Total n-gram occurrences (sum of counts).
    pub fn mass(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, c)| {
                let c = f64::from(c);
                c * c
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Hash character n-grams (sizes `ngram_min..=ngram_max`) into buckets.
///
/// Deterministic: the hash is FNV-1a over the n-gram's UTF-8 bytes, masked
/// to the table size. Texts shorter than `ngram_min` yield an empty vector.
pub fn featurize(text: &str, cfg: &FeatureConfig) -> FeatureVector {
    let chars: Vec<char> = text.chars().collect();
    let mask = (cfg.dims() - 1) as u64;
    let mut counts: HashMap<u32, u32> = HashMap::new();
    let mut buf = [0u8; 4];
    let mut bytes: Vec<u8> = Vec::with_capacity(cfg.ngram_max * 4);
    for n in cfg.ngram_min..=cfg.ngram_max {
        if chars.len() < n {
            break;
        }
        for window in chars.windows(n) {
            bytes.clear();
            for &c in window {
                bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
            let idx = (fnv1a_64(&bytes) & mask) as u32;
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(u32, u32)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    FeatureVector { entries }
}

/// Training hyperparameters. Validation fraction must lie in `(0, 1)` and
/// patience counts epochs without validation-loss improvement.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Epoch decay: `lr_e = learning_rate / (1 + lr_decay * e)`.
    pub lr_decay: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub patience: usize,
    #[serde(default)]
    pub feature: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            lr_decay: 0.1,
            max_epochs: 30,
            batch_size: 32,
            seed: 0,
            validation_fraction: 0.1,
            patience: 3,
            feature: FeatureConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set contains only {0} examples")]
    TooFewExamples(usize),
    #[error("training set is single-label ({0})")]
    SingleLabel(Label),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("validation fraction {0} outside (0, 1)")]
    BadValidationFraction(f64),
    #[error("patience must be >= 1")]
    BadPatience,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file parse error: {0}")]
    Parse(String),
    #[error("model file version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

/// Training provenance carried inside the model file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    /// Mining round that produced this model, when applicable.
    pub round: Option<u32>,
    pub epochs_trained: usize,
    pub selected_epoch: usize,
}

/// Trained scoring function: text -> probability of AI authorship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub feature: FeatureConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub meta: TrainMeta,
}

/// Per-epoch loss/accuracy trace; raw material for scaling curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub selected_epoch: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable `softplus(z) - y*z`, the per-example logistic loss.
fn logistic_loss(z: f64, y: f64) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - y * z
}

struct Example {
    features: FeatureVector,
    norm: f64,
    label: f64,
    class_weight: f64,
}

fn linear_form(weights: &[f64], bias: f64, ex: &Example) -> f64 {
    if ex.norm == 0.0 {
        return bias;
    }
    let mut z = bias;
    for &(idx, count) in ex.features.entries() {
        z += weights[idx as usize] * (f64::from(count) / ex.norm);
    }
    z
}

/// Mean class-weighted logistic loss of a parameter vector on a set of
/// `(features, is_ai, class_weight)` examples. Shared by training,
/// validation, and the finite-difference gradient check.
pub fn batch_loss(examples: &[(FeatureVector, bool, f64)], weights: &[f64], bias: f64) -> f64 {
    let total: f64 = examples
        .iter()
        .map(|(fv, is_ai, cw)| {
            let ex = Example {
                norm: fv.l2_norm(),
                features: fv.clone(),
                label: if *is_ai { 1.0 } else { 0.0 },
                class_weight: *cw,
            };
            ex.class_weight * logistic_loss(linear_form(weights, bias, &ex), ex.label)
        })
        .sum();
    total / examples.len() as f64
}

/// Analytic gradient of [`batch_loss`]: dense weight gradient plus the bias
/// component.
pub fn batch_gradient(
    examples: &[(FeatureVector, bool, f64)],
    weights: &[f64],
    bias: f64,
) -> (Vec<f64>, f64) {
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (fv, is_ai, cw) in examples {
        let norm = fv.l2_norm();
        let y = if *is_ai { 1.0 } else { 0.0 };
        let ex = Example {
            features: fv.clone(),
            norm,
            label: y,
            class_weight: *cw,
        };
        let p = sigmoid(linear_form(weights, bias, &ex));
        let g = cw * (p - y);
        if norm > 0.0 {
            for &(idx, count) in fv.entries() {
                grad_w[idx as usize] += g * f64::from(count) / norm;
            }
        }
        grad_b += g;
    }
    let n = examples.len() as f64;
    for v in &mut grad_w {
        *v /= n;
    }
    (grad_w, grad_b / n)
}

/// Train on a labeled collection, returning the checkpoint with minimum
/// validation loss and the per-epoch history.
///
/// Deterministic given (data, config): featurization is order-stable and
/// parallel, the update loop is sequential, and all shuffles derive from
/// the config seed.
pub fn train(
    train_set: &Collection,
    cfg: &TrainConfig,
) -> Result<(ClassifierModel, TrainHistory), ModelError> {
    if !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) {
        return Err(ModelError::BadValidationFraction(cfg.validation_fraction));
    }
    if cfg.patience == 0 {
        return Err(ModelError::BadPatience);
    }
    if train_set.len() < 2 {
        return Err(ModelError::TooFewExamples(train_set.len()));
    }
    let n_ai = train_set.iter().filter(|d| d.label == Label::Ai).count();
    let n_human = train_set.len() - n_ai;
    if n_ai == 0 {
        return Err(ModelError::SingleLabel(Label::Human));
    }
    if n_human == 0 {
        return Err(ModelError::SingleLabel(Label::Ai));
    }

    // Inverse-frequency class weights, mean 1 over the set.
    let n = train_set.len() as f64;
    let weight_ai = n / (2.0 * n_ai as f64);
    let weight_human = n / (2.0 * n_human as f64);

    let examples: Vec<Example> = train_set
        .docs()
        .par_iter()
        .map(|doc| {
            let features = featurize(&doc.text, &cfg.feature);
            let norm = features.l2_norm();
            Example {
                features,
                norm,
                label: if doc.label == Label::Ai { 1.0 } else { 0.0 },
                class_weight: if doc.label == Label::Ai {
                    weight_ai
                } else {
                    weight_human
                },
            }
        })
        .collect();

    // Seeded validation split.
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "val-split", 0));
    order.shuffle(&mut split_rng);
    let val_len = ((examples.len() as f64 * cfg.validation_fraction).round() as usize)
        .clamp(1, examples.len() - 1);
    let (val_idx, train_idx) = order.split_at(val_len);

    let dims = cfg.feature.dims();
    let mut weights = vec![0.0f64; dims];
    let mut bias = 0.0f64;

    let mut best_weights = weights.clone();
    let mut best_bias = bias;
    let mut best_val_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut epochs_since_best = 0;
    let mut history = TrainHistory::default();

    let eval_split = |weights: &[f64], bias: f64, idx: &[usize]| -> (f64, f64) {
        let mut loss = 0.0;
        let mut correct = 0usize;
        for &i in idx {
            let ex = &examples[i];
            let z = linear_form(weights, bias, ex);
            loss += ex.class_weight * logistic_loss(z, ex.label);
            let predicted_ai = sigmoid(z) > 0.5;
            if predicted_ai == (ex.label > 0.5) {
                correct += 1;
            }
        }
        (loss / idx.len() as f64, correct as f64 / idx.len() as f64)
    };

    let mut batch_order: Vec<usize> = train_idx.to_vec();
    for epoch in 0..cfg.max_epochs {
        let lr = cfg.learning_rate / (1.0 + cfg.lr_decay * epoch as f64);
        let mut epoch_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "epoch", epoch as u64));
        batch_order.shuffle(&mut epoch_rng);

        for (batch_no, batch) in batch_order.chunks(cfg.batch_size.max(1)).enumerate() {
            let mut grad_b = 0.0f64;
            let mut sparse: Vec<(u32, f64)> = Vec::new();
            let mut batch_loss_sum = 0.0f64;
            for &i in batch {
                let ex = &examples[i];
                let z = linear_form(&weights, bias, ex);
                batch_loss_sum += ex.class_weight * logistic_loss(z, ex.label);
                let g = ex.class_weight * (sigmoid(z) - ex.label);
                if ex.norm > 0.0 {
                    for &(idx, count) in ex.features.entries() {
                        sparse.push((idx, g * f64::from(count) / ex.norm));
                    }
                }
                grad_b += g;
            }
            if !batch_loss_sum.is_finite() {
                return Err(ModelError::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            let scale = lr / batch.len() as f64;
            for (idx, g) in sparse {
                weights[idx as usize] -= scale * g;
            }
            bias -= scale * grad_b;
        }

        let (train_loss, train_accuracy) = eval_split(&weights, bias, train_idx);
        let (val_loss, val_accuracy) = eval_split(&weights, bias, val_idx);
        history.epochs.push(EpochStats {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });

        if val_loss < best_val_loss {
            best_val_loss = val_loss;
            best_weights.copy_from_slice(&weights);
            best_bias = bias;
            best_epoch = epoch;
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if epochs_since_best >= cfg.patience {
                break;
            }
        }
    }

    history.selected_epoch = best_epoch;
    let model = ClassifierModel {
        feature: cfg.feature.clone(),
        weights: best_weights,
        bias: best_bias,
        meta: TrainMeta {
            seed: cfg.seed,
            round: None,
            epochs_trained: history.epochs.len(),
            selected_epoch: best_epoch,
        },
    };
    Ok((model, history))
}

impl ClassifierModel {
    /// Score a text: probability in `[0, 1]` that it is AI-written.
    pub fn predict(&self, text: &str) -> f64 {
        let fv = featurize(text, &self.feature);
        self.score_features(&fv)
    }

    /// Score a prefeaturized vector.
    pub fn score_features(&self, fv: &FeatureVector) -> f64 {
        let ex = Example {
            norm: fv.l2_norm(),
            features: fv.clone(),
            label: 0.0,
            class_weight: 1.0,
        };
        sigmoid(linear_form(&self.weights, self.bias, &ex))
    }

    /// Batch scoring; output order matches input order.
    pub fn predict_batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<f64> {
        texts.par_iter().map(|t| self.predict(t.as_ref())).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        let file = VersionedModelFile {
            version: MODEL_FILE_VERSION,
            model: self.clone(),
        };
        let json = serde_json::to_string(&file).expect("model serializes");
        std::fs::write(path, json).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        // Version gate before the full parse so mismatches are reported
        // as such rather than as missing-field errors.
        let probe: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| ModelError::Parse(e.to_string()))?;
        let found = probe
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| ModelError::Parse("missing version field".into()))?
            as u32;
        if found != MODEL_FILE_VERSION {
            return Err(ModelError::VersionMismatch {
                found,
                expected: MODEL_FILE_VERSION,
            });
        }
        let file: VersionedModelFile =
            serde_json::from_str(&raw).map_err(|e| ModelError::Parse(e.to_string()))?;
        Ok(file.model)
    }
}

#[derive(Serialize, Deserialize)]
struct VersionedModelFile {
    version: u32,
    #[serde(flatten)]
    model: ClassifierModel,
}
