//! Elman network: `h_t = tanh(W_ih x_t + W_hh h_{t-1})`, `z_t = W_out h_t`.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    axpy, check_sequence, init_uniform, match_hidden_size, matvec, matvec_t_add, outer_add,
    softmax_xent, SequenceModel, RESERVOIR_FEATURES,
};
use crate::corpus::TokenId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RnnConfig {
    pub hidden: usize,
    pub vocab: usize,
    pub seed: u64,
}

impl RnnConfig {
    /// Sized so the parameter count matches a 1800-feature readout.
    pub fn matched(vocab: usize, seed: u64) -> Result<Self> {
        let hidden = match_hidden_size(vocab, RESERVOIR_FEATURES * vocab)?;
        Ok(RnnConfig { hidden, vocab, seed })
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.hidden + 2 * self.hidden * self.vocab
    }
}

/// Parameters are stored flat as `[W_ih^T | W_hh | W_out]`: the input
/// block is token-major (`L x h`), the others row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rnn {
    hidden: usize,
    vocab: usize,
    params: Vec<f64>,
}

/// States and logits of every position.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnTrace {
    pub states: Vec<Vec<f64>>,
    pub logits: Vec<Vec<f64>>,
}

impl Rnn {
    pub fn new(config: RnnConfig) -> Result<Self> {
        if config.hidden == 0 || config.vocab == 0 {
            return Err(Error::config("hidden and vocabulary sizes must be positive"));
        }
        let params = init_uniform(config.param_count(), config.hidden, config.seed);
        Ok(Rnn { hidden: config.hidden, vocab: config.vocab, params })
    }

    pub fn from_params(hidden: usize, vocab: usize, params: Vec<f64>) -> Result<Self> {
        let expected = hidden * hidden + 2 * hidden * vocab;
        if params.len() != expected {
            return Err(Error::shape(expected, params.len()));
        }
        Ok(Rnn { hidden, vocab, params })
    }

    fn split(&self) -> (&[f64], &[f64], &[f64]) {
        let (w_in, rest) = self.params.split_at(self.vocab * self.hidden);
        let (w_hh, w_out) = rest.split_at(self.hidden * self.hidden);
        (w_in, w_hh, w_out)
    }

    /// Column of `W_ih` selected by `token`.
    pub fn input_column(&self, token: TokenId) -> &[f64] {
        &self.split().0[token * self.hidden..(token + 1) * self.hidden]
    }

    pub fn recurrent(&self) -> &[f64] {
        self.split().1
    }

    pub fn output(&self) -> &[f64] {
        self.split().2
    }

    fn advance(&self, state: &mut [f64], scratch: &mut [f64], token: TokenId) {
        let (w_in, w_hh, _) = self.split();
        let h = self.hidden;
        matvec(scratch, w_hh, state);
        for (s, (a, &b)) in state.iter_mut().zip(scratch.iter().zip(&w_in[token * h..(token + 1) * h])) {
            *s = libm::tanh(a + b);
        }
    }

    pub fn forward(&self, tokens: &[TokenId]) -> Result<RnnTrace> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab) {
            return Err(Error::Vocabulary(alloc::format!("token {bad} outside vocabulary of {}", self.vocab)));
        }
        let mut state = vec![0.0; self.hidden];
        let mut scratch = vec![0.0; self.hidden];
        let mut trace = RnnTrace { states: Vec::new(), logits: Vec::new() };
        for &x in tokens {
            self.advance(&mut state, &mut scratch, x);
            let mut z = vec![0.0; self.vocab];
            matvec(&mut z, self.output(), &state);
            trace.states.push(state.clone());
            trace.logits.push(z);
        }
        Ok(trace)
    }
}

impl SequenceModel for Rnn {
    fn vocab(&self) -> usize {
        self.vocab
    }

    fn hidden(&self) -> usize {
        self.hidden
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn loss_and_gradient(&self, tokens: &[TokenId], mask: &[bool], grad: &mut [f64]) -> Result<f64> {
        if grad.len() != self.params.len() {
            return Err(Error::shape(self.params.len(), grad.len()));
        }
        let last = check_sequence(tokens, mask, self.vocab)?;
        let (h, l) = (self.hidden, self.vocab);
        // states[t] is the state after tokens[..=t]; only t < last matter.
        let steps = last;
        let mut states = vec![0.0; steps * h];
        let mut scratch = vec![0.0; h];
        let mut state = vec![0.0; h];
        for t in 0..steps {
            self.advance(&mut state, &mut scratch, tokens[t]);
            states[t * h..(t + 1) * h].copy_from_slice(&state);
        }

        grad.fill(0.0);
        let (g_in, rest) = grad.split_at_mut(l * h);
        let (g_hh, g_out) = rest.split_at_mut(h * h);
        let (_, w_hh, w_out) = self.split();
        let mut loss = 0.0;
        let mut dh = vec![0.0; h];
        let mut dh_next = vec![0.0; h];
        let mut z = vec![0.0; l];
        for t in (0..steps).rev() {
            let s = &states[t * h..(t + 1) * h];
            dh.copy_from_slice(&dh_next);
            if mask[t + 1] {
                matvec(&mut z, w_out, s);
                loss += softmax_xent(&mut z, tokens[t + 1]);
                outer_add(g_out, &z, s);
                matvec_t_add(&mut dh, w_out, &z);
            }
            for (d, &si) in dh.iter_mut().zip(s) {
                *d *= 1.0 - si * si;
            }
            let x = tokens[t];
            axpy(&mut g_in[x * h..(x + 1) * h], 1.0, &dh);
            dh_next.fill(0.0);
            if t > 0 {
                outer_add(g_hh, &dh, &states[(t - 1) * h..t * h]);
                matvec_t_add(&mut dh_next, w_hh, &dh);
            }
        }
        Ok(loss)
    }

    fn visit_masked(
        &self,
        tokens: &[TokenId],
        mask: &[bool],
        visit: &mut dyn FnMut(usize, &[f64]),
    ) -> Result<()> {
        let last = check_sequence(tokens, mask, self.vocab)?;
        let mut state = vec![0.0; self.hidden];
        let mut scratch = vec![0.0; self.hidden];
        let mut z = vec![0.0; self.vocab];
        for t in 0..last {
            self.advance(&mut state, &mut scratch, tokens[t]);
            if mask[t + 1] {
                matvec(&mut z, self.output(), &state);
                visit(t + 1, &z);
            }
        }
        Ok(())
    }
}
