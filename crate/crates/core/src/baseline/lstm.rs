//! LSTM without biases. Gate pre-activations are `W_x x_t + W_h h_{t-1}`
//! stacked as input, forget, candidate, output.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    axpy, check_sequence, init_uniform, match_lstm_hidden_size, matvec, matvec_t_add, outer_add,
    sigmoid, softmax_xent, SequenceModel, RESERVOIR_FEATURES,
};
use crate::corpus::TokenId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmConfig {
    pub hidden: usize,
    pub vocab: usize,
    pub seed: u64,
}

impl LstmConfig {
    pub fn matched(vocab: usize, seed: u64) -> Result<Self> {
        let hidden = match_lstm_hidden_size(vocab, RESERVOIR_FEATURES * vocab)?;
        Ok(LstmConfig { hidden, vocab, seed })
    }

    pub fn param_count(&self) -> usize {
        4 * self.hidden * self.hidden + 5 * self.hidden * self.vocab
    }
}

/// Parameters are stored flat as `[W_x^T | W_h | W_out]` with the input
/// block token-major (`L x 4h`) and the others row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    hidden: usize,
    vocab: usize,
    params: Vec<f64>,
}

/// Activations of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
    pub cell: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
}

struct Cell {
    h: Vec<f64>,
    c: Vec<f64>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl Lstm {
    pub fn new(config: LstmConfig) -> Result<Self> {
        if config.hidden == 0 || config.vocab == 0 {
            return Err(Error::config("hidden and vocabulary sizes must be positive"));
        }
        let params = init_uniform(config.param_count(), config.hidden, config.seed);
        Ok(Lstm { hidden: config.hidden, vocab: config.vocab, params })
    }

    pub fn from_params(hidden: usize, vocab: usize, params: Vec<f64>) -> Result<Self> {
        let expected = 4 * hidden * hidden + 5 * hidden * vocab;
        if params.len() != expected {
            return Err(Error::shape(expected, params.len()));
        }
        Ok(Lstm { hidden, vocab, params })
    }

    fn split(&self) -> (&[f64], &[f64], &[f64]) {
        let (w_x, rest) = self.params.split_at(self.vocab * 4 * self.hidden);
        let (w_h, w_out) = rest.split_at(4 * self.hidden * self.hidden);
        (w_x, w_h, w_out)
    }

    fn zero_cell(&self) -> Cell {
        let h = self.hidden;
        Cell { h: vec![0.0; h], c: vec![0.0; h], gates: vec![0.0; 4 * h], tanh_c: vec![0.0; h] }
    }

    /// Advances `cell` by one token; `gates` ends up holding activated gates.
    fn advance(&self, cell: &mut Cell, token: TokenId) {
        let (w_x, w_h, _) = self.split();
        let h = self.hidden;
        matvec(&mut cell.gates, w_h, &cell.h);
        axpy(&mut cell.gates, 1.0, &w_x[token * 4 * h..(token + 1) * 4 * h]);
        let (ifg, o) = cell.gates.split_at_mut(3 * h);
        let (if_, g) = ifg.split_at_mut(2 * h);
        if_.iter_mut().for_each(|v| *v = sigmoid(*v));
        g.iter_mut().for_each(|v| *v = libm::tanh(*v));
        o.iter_mut().for_each(|v| *v = sigmoid(*v));
        let gates = &cell.gates;
        for k in 0..h {
            cell.c[k] = gates[h + k] * cell.c[k] + gates[k] * gates[2 * h + k];
            cell.tanh_c[k] = libm::tanh(cell.c[k]);
            cell.h[k] = gates[3 * h + k] * cell.tanh_c[k];
        }
    }

    pub fn forward(&self, tokens: &[TokenId]) -> Result<Vec<LstmStep>> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab) {
            return Err(Error::Vocabulary(alloc::format!("token {bad} outside vocabulary of {}", self.vocab)));
        }
        let h = self.hidden;
        let mut cell = self.zero_cell();
        let mut out = Vec::with_capacity(tokens.len());
        for &x in tokens {
            self.advance(&mut cell, x);
            let mut logits = vec![0.0; self.vocab];
            matvec(&mut logits, self.split().2, &cell.h);
            out.push(LstmStep {
                input: cell.gates[..h].to_vec(),
                forget: cell.gates[h..2 * h].to_vec(),
                candidate: cell.gates[2 * h..3 * h].to_vec(),
                output: cell.gates[3 * h..].to_vec(),
                cell: cell.c.clone(),
                hidden: cell.h.clone(),
                logits,
            });
        }
        Ok(out)
    }
}

impl SequenceModel for Lstm {
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
        let steps = last;
        // Per step: gates (4h), cell (h), tanh(cell) (h), hidden (h).
        let width = 7 * h;
        let mut tape = vec![0.0; steps * width];
        let mut cell = self.zero_cell();
        for t in 0..steps {
            self.advance(&mut cell, tokens[t]);
            let row = &mut tape[t * width..(t + 1) * width];
            row[..4 * h].copy_from_slice(&cell.gates);
            row[4 * h..5 * h].copy_from_slice(&cell.c);
            row[5 * h..6 * h].copy_from_slice(&cell.tanh_c);
            row[6 * h..].copy_from_slice(&cell.h);
        }

        grad.fill(0.0);
        let (g_x, rest) = grad.split_at_mut(l * 4 * h);
        let (g_h, g_out) = rest.split_at_mut(4 * h * h);
        let (_, w_h, w_out) = self.split();
        let mut loss = 0.0;
        let mut dh = vec![0.0; h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        let mut z = vec![0.0; l];
        let zeros = vec![0.0; h];
        for t in (0..steps).rev() {
            let row = &tape[t * width..(t + 1) * width];
            let gates = &row[..4 * h];
            let tanh_c = &row[5 * h..6 * h];
            let hidden = &row[6 * h..];
            let (c_prev, h_prev) = if t > 0 {
                let prev = &tape[(t - 1) * width..t * width];
                (&prev[4 * h..5 * h], &prev[6 * h..])
            } else {
                (&zeros[..], &zeros[..])
            };
            dh.copy_from_slice(&dh_next);
            if mask[t + 1] {
                matvec(&mut z, w_out, hidden);
                loss += softmax_xent(&mut z, tokens[t + 1]);
                outer_add(g_out, &z, hidden);
                matvec_t_add(&mut dh, w_out, &z);
            }
            for k in 0..h {
                let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                let tc = tanh_c[k];
                let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
                dz[k] = dc * g * i * (1.0 - i);
                dz[h + k] = dc * c_prev[k] * f * (1.0 - f);
                dz[2 * h + k] = dc * i * (1.0 - g * g);
                dz[3 * h + k] = dh[k] * tc * o * (1.0 - o);
                dc_next[k] = dc * f;
            }
            let x = tokens[t];
            axpy(&mut g_x[x * 4 * h..(x + 1) * 4 * h], 1.0, &dz);
            dh_next.fill(0.0);
            if t > 0 {
                outer_add(g_h, &dz, h_prev);
                matvec_t_add(&mut dh_next, w_h, &dz);
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
        let mut cell = self.zero_cell();
        let mut z = vec![0.0; self.vocab];
        for t in 0..last {
            self.advance(&mut cell, tokens[t]);
            if mask[t + 1] {
                matvec(&mut z, self.split().2, &cell.h);
                visit(t + 1, &z);
            }
        }
        Ok(())
    }
}
