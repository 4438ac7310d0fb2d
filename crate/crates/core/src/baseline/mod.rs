//! Recurrent baselines trained end to end with BPTT and Adam.
//!
//! Both models share a flat parameter vector so one optimizer handles
//! either. Logits at position `t` come from the hidden state after
//! `tokens[..=t]` and are scored against `tokens[t + 1]`, the same
//! convention the reservoir readout uses.

mod adam;
mod lstm;
mod rnn;

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;

pub use adam::{Adam, AdamConfig};
pub use lstm::{Lstm, LstmConfig};
pub use rnn::{Rnn, RnnConfig};

use crate::corpus::TokenId;
use crate::seed;
use crate::{Error, Result};

/// Readout parameters per vocabulary token that the baselines are sized to.
pub const RESERVOIR_FEATURES: usize = 1800;

/// A recurrent model with hand-written gradients.
pub trait SequenceModel {
    fn vocab(&self) -> usize;

    fn hidden(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Summed cross-entropy over masked positions. `grad` is overwritten
    /// with its exact gradient.
    fn loss_and_gradient(&self, tokens: &[TokenId], mask: &[bool], grad: &mut [f64]) -> Result<f64>;

    /// Calls `visit(t, logits)` for every masked position `t`, where the
    /// logits come from the state after `tokens[..t]`.
    fn visit_masked(
        &self,
        tokens: &[TokenId],
        mask: &[bool],
        visit: &mut dyn FnMut(usize, &[f64]),
    ) -> Result<()>;

    fn param_count(&self) -> usize {
        self.params().len()
    }

    /// `(correct, total)` argmax predictions over masked positions.
    fn masked_hits(&self, tokens: &[TokenId], mask: &[bool]) -> Result<(usize, usize)> {
        let mut hits = 0;
        let mut total = 0;
        self.visit_masked(tokens, mask, &mut |t, logits| {
            total += 1;
            if crate::readout::argmax(logits) == tokens[t] {
                hits += 1;
            }
        })?;
        Ok((hits, total))
    }
}

/// Hidden size whose Elman parameter count `h^2 + 2hL` is closest to `target`.
pub fn match_hidden_size(vocab: usize, target: usize) -> Result<usize> {
    if vocab == 0 {
        return Err(Error::config("vocabulary size must be at least 1"));
    }
    let l = vocab as f64;
    let h = libm::round(-l + libm::sqrt(l * l + target as f64)) as usize;
    if h == 0 {
        return Err(Error::config(format!("target {target} gives an empty hidden layer")));
    }
    Ok(h)
}

/// Hidden size whose LSTM parameter count `4h^2 + 5hL` is closest to `target`.
pub fn match_lstm_hidden_size(vocab: usize, target: usize) -> Result<usize> {
    if vocab == 0 {
        return Err(Error::config("vocabulary size must be at least 1"));
    }
    let b = 5.0 * vocab as f64;
    let root = (-b + libm::sqrt(b * b + 16.0 * target as f64)) / 8.0;
    let lo = libm::floor(root) as usize;
    let count = |h: usize| 4 * h * h + 5 * h * vocab;
    let h = if count(lo + 1).abs_diff(target) < count(lo).abs_diff(target) { lo + 1 } else { lo };
    if h == 0 {
        return Err(Error::config(format!("target {target} gives an empty hidden layer")));
    }
    Ok(h)
}

/// Uniform weights strictly inside `(-1/sqrt(h), 1/sqrt(h))`.
pub(crate) fn init_uniform(count: usize, hidden: usize, seed: u64) -> Vec<f64> {
    let bound = libm::sqrt(1.0 / hidden as f64);
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|_| loop {
            let w: f64 = rng.random_range(-bound..bound);
            if w != -bound {
                break w;
            }
        })
        .collect()
}

/// Checks tokens and mask, returning the last position a state is needed for.
pub(crate) fn check_sequence(tokens: &[TokenId], mask: &[bool], vocab: usize) -> Result<usize> {
    if tokens.len() != mask.len() {
        return Err(Error::shape(tokens.len(), mask.len()));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t >= vocab) {
        return Err(Error::Vocabulary(format!("token {bad} outside vocabulary of {vocab}")));
    }
    if mask.first() == Some(&true) {
        return Err(Error::config("position 0 cannot be masked"));
    }
    match mask.iter().rposition(|&m| m) {
        Some(last) => Ok(last),
        None => Err(Error::config("mask selects no position")),
    }
}

/// `out = W v` for row-major `W` with `v.len()` columns.
pub(crate) fn matvec(out: &mut [f64], w: &[f64], v: &[f64]) {
    for (o, row) in out.iter_mut().zip(w.chunks_exact(v.len())) {
        *o = dot(row, v);
    }
}

/// `out += W^T u` for row-major `W` with `out.len()` columns.
pub(crate) fn matvec_t_add(out: &mut [f64], w: &[f64], u: &[f64]) {
    for (&ui, row) in u.iter().zip(w.chunks_exact(out.len())) {
        axpy(out, ui, row);
    }
}

/// `G += u v^T` for row-major `G`.
pub(crate) fn outer_add(g: &mut [f64], u: &[f64], v: &[f64]) {
    for (&ui, row) in u.iter().zip(g.chunks_exact_mut(v.len())) {
        axpy(row, ui, v);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize the reduction.
    let mut acc = [0.0; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Adds the masked cross-entropy at position `t` and returns
/// `softmax(logits) - onehot(target)` in `logits`.
pub(crate) fn softmax_xent(logits: &mut [f64], target: TokenId) -> f64 {
    let loss = crate::readout::cross_entropy(logits, target);
    let p = crate::readout::softmax(logits);
    logits.copy_from_slice(&p);
    logits[target] -= 1.0;
    loss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_size_matching() {
        assert_eq!(match_hidden_size(5, 9000).unwrap(), 90);
        // h^2 + 2h - 1800 = 0 has root sqrt(1801) - 1 = 41.44
        assert_eq!(match_hidden_size(1, 1800).unwrap(), 41);
        assert!(match_hidden_size(3, 0).is_err());
        assert!(match_hidden_size(0, 100).is_err());
    }

    #[test]
    fn lstm_hidden_size_is_nearest() {
        for vocab in [2, 5, 17, 40] {
            let target = RESERVOIR_FEATURES * vocab;
            let h = match_lstm_hidden_size(vocab, target).unwrap();
            let count = |h: usize| (4 * h * h + 5 * h * vocab) as i64;
            let err = (count(h) - target as i64).abs();
            assert!(err <= (count(h + 1) - target as i64).abs());
            assert!(err <= (count(h - 1) - target as i64).abs());
        }
    }

    #[test]
    fn init_is_strictly_bounded() {
        let w = init_uniform(10_000, 16, 3);
        assert!(w.iter().all(|&x| x.abs() < 0.25));
        assert!(w.iter().any(|&x| x > 0.2) && w.iter().any(|&x| x < -0.2));
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..11).map(|i| (i * i) as f64 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn sequence_checks() {
        assert_eq!(check_sequence(&[0, 1, 1], &[false, true, false], 2).unwrap(), 1);
        assert!(check_sequence(&[0, 1], &[false, false], 2).is_err());
        assert!(check_sequence(&[0, 1], &[true, true], 2).is_err());
        assert!(matches!(check_sequence(&[0, 2], &[false, true], 2), Err(Error::Vocabulary(_))));
        assert!(matches!(check_sequence(&[0, 1], &[false], 2), Err(Error::Shape { .. })));
    }
}
