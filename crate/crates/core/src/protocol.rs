//! Training loops that produce test-accuracy curves.
//!
//! A training step is one training sequence. The readout sees each
//! sequence once and takes one SGD update per masked position; baselines
//! take one Adam step per sequence for a number of epochs. Test accuracy is
//! pooled over every masked position of the test set.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::baseline::{Adam, AdamConfig, SequenceModel};
use crate::corpus::TaskSample;
use crate::metric::AccuracyCurve;
use crate::readout::ReadoutModel;
use crate::reservoir::Reservoir;
use crate::seed;
use crate::{Error, Result};

/// When test accuracy is measured, in training steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cadence {
    pub dense_every: u64,
    pub dense_until: u64,
    pub sparse_every: u64,
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence { dense_every: 10, dense_until: 100, sparse_every: 50 }
    }
}

impl Cadence {
    /// Measures every `every` steps.
    pub fn uniform(every: u64) -> Self {
        Cadence { dense_every: every, dense_until: 0, sparse_every: every }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dense_every == 0 || self.sparse_every == 0 {
            return Err(Error::config("cadence intervals must be positive"));
        }
        Ok(())
    }

    /// Whether step `step` of `total` is measured. The last step always is.
    pub fn is_checkpoint(&self, step: u64, total: u64) -> bool {
        if step == 0 {
            return false;
        }
        if step == total {
            return true;
        }
        if step <= self.dense_until {
            step.is_multiple_of(self.dense_every)
        } else {
            step.is_multiple_of(self.sparse_every)
        }
    }

    pub fn steps(&self, total: u64) -> Vec<u64> {
        (1..=total).filter(|&s| self.is_checkpoint(s, total)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutOptions {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Test-set features are kept in memory when they fit in this many bytes;
    /// otherwise they are recomputed at every measurement.
    pub cache_bytes: usize,
}

impl Default for ReadoutOptions {
    fn default() -> Self {
        ReadoutOptions {
            learning_rate: crate::readout::DEFAULT_LEARNING_RATE,
            weight_decay: crate::readout::DEFAULT_WEIGHT_DECAY,
            cache_bytes: 1 << 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutOutcome {
    pub curve: AccuracyCurve,
    pub model: ReadoutModel,
    /// Training sequences consumed.
    pub sequences: u64,
    /// SGD updates taken.
    pub updates: u64,
    pub mean_loss: f64,
}

/// Features preceding each masked test position, with their targets.
struct TestFeatures {
    features: Vec<f64>,
    targets: Vec<usize>,
}

fn collect_test_features(reservoir: &dyn Reservoir, test: &[TaskSample]) -> Result<TestFeatures> {
    let mut out = TestFeatures { features: Vec::new(), targets: Vec::new() };
    for sample in test {
        let (tokens, mask) = (sample.tokens(), sample.mask());
        reservoir.visit_sequence(tokens, &mut |t, f| {
            if t + 1 < tokens.len() && mask[t + 1] {
                out.features.extend_from_slice(f);
                out.targets.push(tokens[t + 1]);
            }
        })?;
    }
    Ok(out)
}

fn readout_accuracy(
    model: &ReadoutModel,
    reservoir: &dyn Reservoir,
    test: &[TaskSample],
    cache: Option<&TestFeatures>,
) -> Result<f64> {
    let (mut hits, mut total) = (0usize, 0usize);
    match cache {
        Some(c) => {
            for (f, &target) in c.features.chunks_exact(model.features()).zip(&c.targets) {
                total += 1;
                hits += (model.predict_token(f)? == target) as usize;
            }
        }
        None => {
            let mut failure = None;
            for sample in test {
                let (tokens, mask) = (sample.tokens(), sample.mask());
                reservoir.visit_sequence(tokens, &mut |t, f| {
                    if t + 1 < tokens.len() && mask[t + 1] {
                        total += 1;
                        match model.predict_token(f) {
                            Ok(p) => hits += (p == tokens[t + 1]) as usize,
                            Err(e) => failure = Some(e),
                        }
                    }
                })?;
            }
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }
    if total == 0 {
        return Err(Error::UndefinedAccuracy);
    }
    Ok(hits as f64 / total as f64)
}

fn masked_positions(samples: &[TaskSample]) -> usize {
    samples.iter().map(|s| s.masked_count()).sum()
}

/// Trains a zero-initialized readout in a single pass over `train`.
pub fn train_readout(
    reservoir: &dyn Reservoir,
    vocab: usize,
    train: &[TaskSample],
    test: &[TaskSample],
    cadence: &Cadence,
    options: &ReadoutOptions,
) -> Result<ReadoutOutcome> {
    cadence.validate()?;
    let k = reservoir.feature_dim();
    let bytes = masked_positions(test).saturating_mul(k * core::mem::size_of::<f64>());
    let cache = if bytes <= options.cache_bytes {
        Some(collect_test_features(reservoir, test)?)
    } else {
        None
    };
    let mut model = ReadoutModel::with_rates(k, vocab, options.learning_rate, options.weight_decay);
    let mut curve = AccuracyCurve::empty();
    let total = train.len() as u64;
    if total == 0 {
        curve.push(1, readout_accuracy(&model, reservoir, test, cache.as_ref())?)?;
        return Ok(ReadoutOutcome { curve, model, sequences: 0, updates: 0, mean_loss: 0.0 });
    }
    let mut loss_sum = 0.0;
    let mut failure = None;
    for (i, sample) in train.iter().enumerate() {
        let step = i as u64 + 1;
        let (tokens, mask) = (sample.tokens(), sample.mask());
        reservoir.visit_sequence(tokens, &mut |t, f| {
            if failure.is_none() && t + 1 < tokens.len() && mask[t + 1] {
                match model.sgd_update(f, tokens[t + 1]) {
                    Ok(ev) if ev.loss.is_finite() => loss_sum += ev.loss,
                    Ok(_) => failure = Some(Error::Diverged { step }),
                    Err(e) => failure = Some(e),
                }
            }
        })?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if cadence.is_checkpoint(step, total) {
            curve.push(step, readout_accuracy(&model, reservoir, test, cache.as_ref())?)?;
        }
    }
    let updates = model.steps();
    let mean_loss = if updates > 0 { loss_sum / updates as f64 } else { 0.0 };
    Ok(ReadoutOutcome { curve, model, sequences: total, updates, mean_loss })
}

/// Pooled masked accuracy of a baseline on `test`.
pub fn baseline_accuracy<M: SequenceModel + ?Sized>(model: &M, test: &[TaskSample]) -> Result<f64> {
    let (mut hits, mut total) = (0, 0);
    for sample in test.iter().filter(|s| s.masked_count() > 0) {
        let (h, n) = model.masked_hits(sample.tokens(), sample.mask())?;
        hits += h;
        total += n;
    }
    if total == 0 {
        return Err(Error::UndefinedAccuracy);
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineOptions {
    pub epochs: u32,
    pub adam: AdamConfig,
    /// Seeds the per-epoch shuffle of the training order.
    pub shuffle_seed: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions { epochs: 10, adam: AdamConfig::default(), shuffle_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub curve: AccuracyCurve,
    /// Sequence presentations, counted over all epochs.
    pub sequences: u64,
    pub mean_loss: f64,
}

/// Trains `model` in place with one Adam step per training sequence.
pub fn train_baseline<M: SequenceModel + ?Sized>(
    model: &mut M,
    train: &[TaskSample],
    test: &[TaskSample],
    cadence: &Cadence,
    options: &BaselineOptions,
) -> Result<BaselineOutcome> {
    cadence.validate()?;
    let usable: Vec<&TaskSample> = train.iter().filter(|s| s.masked_count() > 0).collect();
    let total = options.epochs as u64 * usable.len() as u64;
    let mut curve = AccuracyCurve::empty();
    if total == 0 {
        curve.push(1, baseline_accuracy(model, test)?)?;
        return Ok(BaselineOutcome { curve, sequences: 0, mean_loss: 0.0 });
    }
    let mut adam = Adam::new(model.param_count(), options.adam);
    let mut grad = vec![0.0; model.param_count()];
    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut step = 0u64;
    let mut loss_sum = 0.0;
    for epoch in 0..options.epochs {
        let mut rng = seed::rng(seed::derive(options.shuffle_seed, &[epoch as u64]));
        order.shuffle(&mut rng);
        for &i in &order {
            step += 1;
            let sample = usable[i];
            let loss = model.loss_and_gradient(sample.tokens(), sample.mask(), &mut grad)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { step });
            }
            loss_sum += loss;
            adam.step(model.params_mut(), &grad)?;
            if cadence.is_checkpoint(step, total) {
                curve.push(step, baseline_accuracy(model, test)?)?;
            }
        }
    }
    if curve.is_empty() {
        return Err(Error::config(format!("cadence produced no measurement in {total} steps")));
    }
    Ok(BaselineOutcome { curve, sequences: step, mean_loss: loss_sum / step as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{Rnn, RnnConfig};
    use crate::corpus::{generate, TaskSpec};
    use crate::reservoir::{Esn, EsnConfig};

    #[test]
    fn default_cadence_points() {
        let c = Cadence::default();
        let steps = c.steps(960);
        assert_eq!(&steps[..11], &[10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 150]);
        assert_eq!(*steps.last().unwrap(), 960);
        assert_eq!(steps[steps.len() - 2], 950);
        assert_eq!(c.steps(7), vec![7]);
        assert!(Cadence::uniform(0).validate().is_err());
    }

    fn small_split(task: u8, count: usize) -> (usize, Vec<TaskSample>, Vec<TaskSample>) {
        let spec = TaskSpec::new(task).unwrap();
        let ds = generate(&spec, 5, count).unwrap().split(0.8, 6).unwrap();
        let train = ds.train().cloned().collect();
        let test = ds.test().cloned().collect();
        (ds.vocabulary.len(), train, test)
    }

    #[test]
    fn readout_single_pass_and_cache_agree() {
        let (vocab, train, test) = small_split(1, 40);
        let esn = Esn::new(EsnConfig { size: 60, ..EsnConfig::default() }, vocab).unwrap();
        let cached = train_readout(&esn, vocab, &train, &test, &Cadence::uniform(8), &ReadoutOptions::default()).unwrap();
        let streamed = train_readout(
            &esn,
            vocab,
            &train,
            &test,
            &Cadence::uniform(8),
            &ReadoutOptions { cache_bytes: 0, ..ReadoutOptions::default() },
        )
        .unwrap();
        assert_eq!(cached, streamed);
        assert_eq!(cached.sequences, 32);
        let masked: usize = train.iter().map(|s| s.masked_count()).sum();
        assert_eq!(cached.updates, masked as u64);
        assert_eq!(cached.curve.points().iter().map(|p| p.0).collect::<Vec<_>>(), vec![8, 16, 24, 32]);
    }

    #[test]
    fn empty_training_gives_untrained_point() {
        let (vocab, _, test) = small_split(1, 20);
        let mut rnn = Rnn::new(RnnConfig { hidden: 4, vocab, seed: 1 }).unwrap();
        let untrained = baseline_accuracy(&rnn, &test).unwrap();
        let opts = BaselineOptions { epochs: 0, ..BaselineOptions::default() };
        let out = train_baseline(&mut rnn, &[], &test, &Cadence::default(), &opts).unwrap();
        assert_eq!(out.curve.points(), &[(1, untrained)]);
        assert_eq!(out.sequences, 0);
    }

    #[test]
    fn baseline_is_deterministic() {
        let (vocab, train, test) = small_split(1, 30);
        let run = || {
            let mut rnn = Rnn::new(RnnConfig { hidden: 6, vocab, seed: 2 }).unwrap();
            let opts = BaselineOptions { epochs: 2, ..BaselineOptions::default() };
            let out = train_baseline(&mut rnn, &train, &test, &Cadence::uniform(12), &opts).unwrap();
            (out, rnn)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.sequences, 48);
    }

    #[test]
    fn final_accuracy_ignores_cadence() {
        let (vocab, train, test) = small_split(1, 30);
        let esn = Esn::new(EsnConfig { size: 40, ..EsnConfig::default() }, vocab).unwrap();
        let opts = ReadoutOptions::default();
        let a = train_readout(&esn, vocab, &train, &test, &Cadence::default(), &opts).unwrap();
        let b = train_readout(&esn, vocab, &train, &test, &Cadence::uniform(1), &opts).unwrap();
        assert_eq!(a.curve.final_accuracy(), b.curve.final_accuracy());
        assert_eq!(a.model, b.model);
    }
}
