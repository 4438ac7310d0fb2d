use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;

use super::Reservoir;
use crate::corpus::TokenId;
use crate::seed;
use crate::{Error, Result};

/// Echo-state network settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnConfig {
    /// State dimension.
    pub size: usize,
    /// Nonzero recurrent weights per row.
    pub nnz_per_row: usize,
    /// Leak rate: `r <- (1 - leak) r + leak tanh(W r + W_in x)`.
    pub leak: f64,
    /// Rescale `W` to this estimated spectral radius. Off by default.
    pub spectral_radius: Option<f64>,
    pub seed: u64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        EsnConfig { size: 1800, nnz_per_row: 10, leak: 1.0, spectral_radius: None, seed: 0 }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::config("ESN size must be positive"));
        }
        if self.nnz_per_row == 0 || self.nnz_per_row > self.size {
            return Err(Error::config(format!(
                "nonzeros per row must be in 1..={}, got {}",
                self.size, self.nnz_per_row
            )));
        }
        if !(0.0..=1.0).contains(&self.leak) {
            return Err(Error::config(format!("leak {} outside [0, 1]", self.leak)));
        }
        if let Some(rho) = self.spectral_radius {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::config("spectral radius must be positive"));
            }
        }
        Ok(())
    }
}

/// Row-compressed sparse matrix with a fixed number of entries per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    per_row: usize,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = i * self.per_row..(i + 1) * self.per_row;
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.values[span].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let span = i * self.per_row..(i + 1) * self.per_row;
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &w)| w * x[c as usize])
                .sum();
        }
    }

    fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Spectral radius estimate from the growth rate of `||W^k v||`.
fn estimate_spectral_radius(w: &SparseMatrix, seed: u64) -> f64 {
    const ITERS: usize = 200;
    const BURN_IN: usize = 50;
    let mut rng = seed::rng(seed);
    let mut v: Vec<f64> = (0..w.rows).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut next = vec![0.0; w.rows];
    let mut log_growth = 0.0;
    for k in 0..ITERS {
        let before = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if before == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= before);
        w.mul_vec(&v, &mut next);
        core::mem::swap(&mut v, &mut next);
        if k >= BURN_IN {
            log_growth += libm::log(libm::sqrt(v.iter().map(|x| x * x).sum::<f64>()));
        }
    }
    libm::exp(log_growth / (ITERS - BURN_IN) as f64)
}

/// Reservoir state: one real value per neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnState(pub Vec<f64>);

/// Echo-state network with frozen random weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Esn {
    config: EsnConfig,
    inputs: usize,
    recurrent: SparseMatrix,
    /// Input weights stored column-major: column `j` is `input[j * K..(j + 1) * K]`.
    input: Vec<f64>,
}

impl Esn {
    /// Samples `W` (exactly `nnz_per_row` entries per row at random distinct
    /// columns, values uniform in [-1, 1]) and dense `W_in`, uniform in [-1, 1].
    pub fn new(config: EsnConfig, inputs: usize) -> Result<Self> {
        config.validate()?;
        if inputs == 0 {
            return Err(Error::config("ESN needs at least one input"));
        }
        let k = config.size;
        let mut rng = seed::rng(config.seed);
        let mut cols = Vec::with_capacity(k * config.nnz_per_row);
        let mut values = Vec::with_capacity(k * config.nnz_per_row);
        for _ in 0..k {
            let mut row: Vec<usize> = index::sample(&mut rng, k, config.nnz_per_row).into_vec();
            row.sort_unstable();
            for c in row {
                cols.push(c as u32);
                values.push(rng.random_range(-1.0..=1.0));
            }
        }
        let mut recurrent = SparseMatrix { rows: k, per_row: config.nnz_per_row, cols, values };
        let input = (0..k * inputs).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Some(target) = config.spectral_radius {
            let rho = estimate_spectral_radius(&recurrent, seed::derive(config.seed, &[1]));
            if rho > 0.0 {
                recurrent.scale(target / rho);
            }
        }
        Ok(Esn { config, inputs, recurrent, input })
    }

    pub fn config(&self) -> &EsnConfig {
        &self.config
    }

    pub fn recurrent(&self) -> &SparseMatrix {
        &self.recurrent
    }

    /// Entry `(i, j)` of `W_in` (neuron `i`, input `j`).
    pub fn input_weight(&self, i: usize, j: usize) -> f64 {
        self.input[j * self.config.size + i]
    }

    pub fn zero_state(&self) -> EsnState {
        EsnState(vec![0.0; self.config.size])
    }

    /// One update with an arbitrary input vector.
    pub fn step(&self, state: &EsnState, x: &[f64]) -> Result<EsnState> {
        let k = self.config.size;
        if state.0.len() != k {
            return Err(Error::shape(k, state.0.len()));
        }
        if x.len() != self.inputs {
            return Err(Error::shape(self.inputs, x.len()));
        }
        let mut drive = vec![0.0; k];
        self.recurrent.mul_vec(&state.0, &mut drive);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let col = &self.input[j * k..(j + 1) * k];
                drive.iter_mut().zip(col).for_each(|(d, &w)| *d += w * xj);
            }
        }
        let mut next = state.0.clone();
        self.blend(&mut next, &drive);
        Ok(EsnState(next))
    }

    fn blend(&self, r: &mut [f64], drive: &[f64]) {
        let leak = self.config.leak;
        if leak == 1.0 {
            r.iter_mut().zip(drive).for_each(|(r, &d)| *r = libm::tanh(d));
        } else {
            r.iter_mut()
                .zip(drive)
                .for_each(|(r, &d)| *r = (1.0 - leak) * *r + leak * libm::tanh(d));
        }
    }

    /// One update with a one-hot input, written into `next`.
    fn step_token(&self, state: &[f64], token: TokenId, drive: &mut [f64], next: &mut [f64]) {
        let k = self.config.size;
        self.recurrent.mul_vec(state, drive);
        drive.iter_mut().zip(&self.input[token * k..(token + 1) * k]).for_each(|(d, &w)| *d += w);
        next.copy_from_slice(state);
        self.blend(next, drive);
    }
}

impl Reservoir for Esn {
    fn feature_dim(&self) -> usize {
        self.config.size
    }

    fn input_dim(&self) -> usize {
        self.inputs
    }

    fn visit_sequence(&self, tokens: &[TokenId], visit: &mut dyn FnMut(usize, &[f64])) -> Result<()> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.inputs) {
            return Err(Error::Vocabulary(format!("token id {bad} >= {}", self.inputs)));
        }
        let mut state = vec![0.0; self.config.size];
        let mut next = vec![0.0; self.config.size];
        let mut drive = vec![0.0; self.config.size];
        for (t, &tok) in tokens.iter().enumerate() {
            self.step_token(&state, tok, &mut drive, &mut next);
            core::mem::swap(&mut state, &mut next);
            visit(t, &state);
        }
        Ok(())
    }
}
