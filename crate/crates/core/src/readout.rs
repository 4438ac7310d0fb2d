//! Linear softmax decoder trained online with SGD and weight decay.
//!
//! The decoder maps a `K`-dimensional reservoir feature `r` to logits
//! `z = W_out^T r` over the `L` vocabulary tokens. There is no bias term.
//! Weights start at zero so the first prediction is uniform.

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::TokenId;
use crate::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.001;

/// Result of one SGD update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainEvent {
    pub step: u64,
    /// Cross-entropy before the update.
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    features: usize,
    classes: usize,
    /// Row `j` holds the weights feeding logit `j` (the transpose of `W_out`).
    weights: Vec<f64>,
    pub learning_rate: f64,
    pub weight_decay: f64,
    steps: u64,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `-log softmax(logits)[target]`.
pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|&z| libm::exp(z - max)).sum::<f64>());
    lse - logits[target]
}

impl ReadoutModel {
    pub fn new(features: usize, classes: usize) -> Self {
        ReadoutModel::with_rates(features, classes, DEFAULT_LEARNING_RATE, DEFAULT_WEIGHT_DECAY)
    }

    pub fn with_rates(features: usize, classes: usize, learning_rate: f64, weight_decay: f64) -> Self {
        ReadoutModel {
            features,
            classes,
            weights: vec![0.0; features * classes],
            learning_rate,
            weight_decay,
            steps: 0,
        }
    }

    /// Builds a model from `W_out` given row-major as `features x classes`.
    pub fn from_weights(features: usize, classes: usize, w_out: &[f64]) -> Result<Self> {
        if w_out.len() != features * classes {
            return Err(Error::shape(features * classes, w_out.len()));
        }
        let mut m = ReadoutModel::new(features, classes);
        for k in 0..features {
            for j in 0..classes {
                m.weights[j * features + k] = w_out[k * classes + j];
            }
        }
        Ok(m)
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Entry `(k, j)` of `W_out`.
    pub fn weight(&self, feature: usize, class: usize) -> f64 {
        self.weights[class * self.features + feature]
    }

    /// `W_out` row-major as `features x classes`.
    pub fn w_out(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.weights.len()];
        for j in 0..self.classes {
            for k in 0..self.features {
                out[k * self.classes + j] = self.weights[j * self.features + k];
            }
        }
        out
    }

    fn check(&self, feature: &[f64]) -> Result<()> {
        if feature.len() != self.features {
            return Err(Error::shape(self.features, feature.len()));
        }
        Ok(())
    }

    pub fn logits(&self, feature: &[f64]) -> Result<Vec<f64>> {
        self.check(feature)?;
        Ok(self
            .weights
            .chunks_exact(self.features)
            .map(|row| row.iter().zip(feature).map(|(w, r)| w * r).sum())
            .collect())
    }

    /// Probability of every token.
    pub fn predict(&self, feature: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(feature)?))
    }

    pub fn predict_token(&self, feature: &[f64]) -> Result<TokenId> {
        Ok(argmax(&self.logits(feature)?))
    }

    pub fn loss(&self, feature: &[f64], target: TokenId) -> Result<f64> {
        self.check_target(target)?;
        Ok(cross_entropy(&self.logits(feature)?, target))
    }

    /// `dCE/dW_out` row-major as `features x classes`, without weight decay.
    pub fn gradient(&self, feature: &[f64], target: TokenId) -> Result<Vec<f64>> {
        self.check_target(target)?;
        let mut g = self.predict(feature)?;
        g[target] -= 1.0;
        Ok(feature.iter().flat_map(|&r| g.iter().map(move |&d| d * r)).collect())
    }

    fn check_target(&self, target: TokenId) -> Result<()> {
        if target >= self.classes {
            return Err(Error::Vocabulary(alloc::format!(
                "target {target} outside vocabulary of {}",
                self.classes
            )));
        }
        Ok(())
    }

    /// `W_out <- W_out - lr (dCE/dW_out + wd W_out)` on one example.
    pub fn sgd_update(&mut self, feature: &[f64], target: TokenId) -> Result<TrainEvent> {
        self.check_target(target)?;
        let logits = self.logits(feature)?;
        let loss = cross_entropy(&logits, target);
        let probs = softmax(&logits);
        let lr = self.learning_rate;
        let decay = 1.0 - lr * self.weight_decay;
        for (j, row) in self.weights.chunks_exact_mut(self.features).enumerate() {
            let g = probs[j] - if j == target { 1.0 } else { 0.0 };
            let step = lr * g;
            for (w, &r) in row.iter_mut().zip(feature) {
                *w = decay * *w - step * r;
            }
        }
        self.steps += 1;
        Ok(TrainEvent { step: self.steps, loss })
    }
}

/// Fraction of masked positions `t` where the prediction from
/// `features[t - 1]` equals `tokens[t]`.
pub fn masked_accuracy(
    model: &ReadoutModel,
    features: &[Vec<f64>],
    tokens: &[TokenId],
    mask: &[bool],
) -> Result<f64> {
    if tokens.len() != mask.len() {
        return Err(Error::shape(tokens.len(), mask.len()));
    }
    if features.len() + 1 < tokens.len() {
        return Err(Error::shape(tokens.len() - 1, features.len()));
    }
    let mut total = 0usize;
    let mut correct = 0usize;
    for t in (1..tokens.len()).filter(|&t| mask[t]) {
        total += 1;
        if model.predict_token(&features[t - 1])? == tokens[t] {
            correct += 1;
        }
    }
    if mask.first() == Some(&true) {
        return Err(Error::config("position 0 cannot be masked"));
    }
    if total == 0 {
        return Err(Error::UndefinedAccuracy);
    }
    Ok(correct as f64 / total as f64)
}
