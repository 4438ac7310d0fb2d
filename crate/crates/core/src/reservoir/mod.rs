//! Frozen dynamical systems that turn token sequences into feature vectors.
//!
//! Both reservoirs start every sequence from the zero state. The feature
//! emitted at position `t` is the state after consuming `tokens[..=t]`; the
//! readout uses it to predict `tokens[t + 1]`.

mod ca;
mod esn;

use alloc::vec::Vec;

pub use ca::{ca_rule_table, ca_step, inject, CaConfig, CaState, InjectionMap, Reca};
pub use esn::{Esn, EsnConfig, EsnState, SparseMatrix};

use crate::corpus::TokenId;
use crate::Result;

/// A feature generator with fixed weights.
pub trait Reservoir {
    /// Length of each emitted feature vector.
    fn feature_dim(&self) -> usize;

    /// Number of input tokens accepted.
    fn input_dim(&self) -> usize;

    /// Runs `tokens` from the zero state, calling `visit(t, feature)` after
    /// each token.
    fn visit_sequence(&self, tokens: &[TokenId], visit: &mut dyn FnMut(usize, &[f64])) -> Result<()>;

    /// Collects the feature vector of every position.
    fn run_sequence(&self, tokens: &[TokenId]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(tokens.len());
        self.visit_sequence(tokens, &mut |_, f| out.push(f.to_vec()))?;
        Ok(out)
    }
}
