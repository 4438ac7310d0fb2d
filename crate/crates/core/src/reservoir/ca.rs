//! Reservoir built on an elementary (radius-1, binary) cellular automaton.
//!
//! Grids are stored as packed `u64` words and updated 64 cells at a time.
//! Boundaries are circular. The neighborhood value of cell `i` is
//! `4 * s[i-1] + 2 * s[i] + s[i+1]`, and the new cell is bit `k` of the
//! Wolfram rule number for neighborhood value `k`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use super::Reservoir;
use crate::corpus::TokenId;
use crate::seed;
use crate::{Error, Result};

/// Output of `rule` for each neighborhood value `0..8`.
pub fn ca_rule_table(rule: u32) -> Result<[bool; 8]> {
    if rule > 255 {
        return Err(Error::config(format!("rule {rule} is not in 0..=255")));
    }
    let mut table = [false; 8];
    for (k, out) in table.iter_mut().enumerate() {
        *out = (rule >> k) & 1 == 1;
    }
    Ok(table)
}

/// Binary grid of `len` cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CaState {
    words: Vec<u64>,
    len: usize,
}

impl CaState {
    pub fn zeros(len: usize) -> Self {
        CaState { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = CaState::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn tail_mask(&self) -> u64 {
        match self.len % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    /// Cell `i` of the result holds cell `i - 1` of `self` (circular).
    fn left_neighbors(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .words
            .iter()
            .enumerate()
            .map(|(w, &x)| (x << 1) | if w > 0 { self.words[w - 1] >> 63 } else { 0 })
            .collect();
        if let Some(last) = out.last_mut() {
            *last &= self.tail_mask();
        }
        if self.len > 0 && self.get(self.len - 1) {
            out[0] |= 1;
        }
        out
    }

    /// Cell `i` of the result holds cell `i + 1` of `self` (circular).
    fn right_neighbors(&self) -> Vec<u64> {
        let n = self.words.len();
        let mut out: Vec<u64> = self
            .words
            .iter()
            .enumerate()
            .map(|(w, &x)| (x >> 1) | if w + 1 < n { self.words[w + 1] << 63 } else { 0 })
            .collect();
        if self.len > 0 && self.get(0) {
            let i = self.len - 1;
            out[i / 64] |= 1 << (i % 64);
        }
        out
    }

    /// Writes the cells as `0.0`/`1.0` into `out`.
    fn write_features(&self, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.len) {
            *o = if self.get(i) { 1.0 } else { 0.0 };
        }
    }
}

fn apply_rule(state: &CaState, table: &[bool; 8]) -> CaState {
    let left = state.left_neighbors();
    let right = state.right_neighbors();
    let mut words = vec![0u64; state.words.len()];
    for (k, _) in table.iter().enumerate().filter(|(_, &on)| on) {
        for (w, out) in words.iter_mut().enumerate() {
            let l = if k & 4 != 0 { left[w] } else { !left[w] };
            let c = if k & 2 != 0 { state.words[w] } else { !state.words[w] };
            let r = if k & 1 != 0 { right[w] } else { !right[w] };
            *out |= l & c & r;
        }
    }
    if let Some(last) = words.last_mut() {
        *last &= state.tail_mask();
    }
    CaState { words, len: state.len }
}

/// One synchronous update of every cell.
pub fn ca_step(state: &CaState, rule: u8) -> CaState {
    let table = ca_rule_table(rule as u32).expect("u8 rules are in range");
    apply_rule(state, &table)
}

/// Cellwise exclusive-or of an input projection and a grid.
pub fn inject(p: &CaState, s: &CaState) -> Result<CaState> {
    if p.len != s.len {
        return Err(Error::shape(s.len, p.len));
    }
    let words = p.words.iter().zip(&s.words).map(|(a, b)| a ^ b).collect();
    Ok(CaState { words, len: s.len })
}

/// Reservoir cellular automaton settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CaConfig {
    /// Wolfram rule number.
    pub rule: u8,
    /// Grid size `n`.
    pub width: usize,
    /// Number of consecutive grids concatenated per input (`r`).
    pub expansion: usize,
    /// Cells flipped by each input token.
    pub inject_width: usize,
    pub seed: u64,
}

impl Default for CaConfig {
    fn default() -> Self {
        CaConfig { rule: 110, width: 450, expansion: 4, inject_width: 4, seed: 0 }
    }
}

impl CaConfig {
    pub fn feature_dim(&self) -> usize {
        self.width * self.expansion
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 3 {
            return Err(Error::config("CA grid needs at least 3 cells"));
        }
        if self.expansion == 0 {
            return Err(Error::config("CA expansion must be positive"));
        }
        if self.inject_width == 0 || self.inject_width > self.width {
            return Err(Error::config(format!(
                "injection width must be in 1..={}, got {}",
                self.width, self.inject_width
            )));
        }
        Ok(())
    }
}

/// Binary `L x n` projection: row `j` marks the cells flipped by token `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionMap {
    rows: Vec<CaState>,
}

impl InjectionMap {
    /// Each row gets `width` distinct random cells; rows are pairwise distinct.
    pub fn random(inputs: usize, cells: usize, width: usize, seed: u64) -> Result<Self> {
        if width == 0 || width > cells {
            return Err(Error::config("injection width must be in 1..=cells"));
        }
        if !binomial_at_least(cells, width, inputs) {
            return Err(Error::config("not enough distinct injection patterns for the vocabulary"));
        }
        let mut rng = seed::rng(seed);
        let mut rows: Vec<CaState> = Vec::with_capacity(inputs);
        while rows.len() < inputs {
            let mut row = CaState::zeros(cells);
            for c in index::sample(&mut rng, cells, width) {
                row.set(c, true);
            }
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
        Ok(InjectionMap { rows })
    }

    pub fn row(&self, input: usize) -> &CaState {
        &self.rows[input]
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    /// `P x` over GF(2) for a binary input vector.
    pub fn project(&self, x: &[f64]) -> Result<CaState> {
        if x.len() != self.rows.len() {
            return Err(Error::shape(self.rows.len(), x.len()));
        }
        let mut p = CaState::zeros(self.rows[0].len);
        for (row, &xj) in self.rows.iter().zip(x) {
            if xj != 0.0 {
                p = inject(row, &p)?;
            }
        }
        Ok(p)
    }
}

/// Whether `C(n, k) >= need`.
fn binomial_at_least(n: usize, k: usize, need: usize) -> bool {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
        if c >= need as u128 {
            return true;
        }
    }
    c >= need as u128
}

/// Reservoir cellular automaton: inputs are XOR-ed into the grid, which is
/// then updated `expansion` times; the intermediate grids form the feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Reca {
    config: CaConfig,
    table: [bool; 8],
    map: InjectionMap,
}

impl Reca {
    pub fn new(config: CaConfig, inputs: usize) -> Result<Self> {
        config.validate()?;
        if inputs == 0 {
            return Err(Error::config("ReCA needs at least one input"));
        }
        let map = InjectionMap::random(inputs, config.width, config.inject_width, config.seed)?;
        let table = ca_rule_table(config.rule as u32)?;
        Ok(Reca { config, table, map })
    }

    pub fn config(&self) -> &CaConfig {
        &self.config
    }

    pub fn injection(&self) -> &InjectionMap {
        &self.map
    }

    pub fn zero_state(&self) -> CaState {
        CaState::zeros(self.config.width)
    }

    /// Injects `x`, runs `expansion` updates and returns the last grid with
    /// the concatenation of all intermediate grids.
    pub fn step(&self, state: &CaState, x: &[f64]) -> Result<(CaState, Vec<f64>)> {
        if state.len != self.config.width {
            return Err(Error::shape(self.config.width, state.len));
        }
        let p = self.map.project(x)?;
        let mut feature = vec![0.0; self.config.feature_dim()];
        let next = self.expand(inject(&p, state)?, &mut feature);
        Ok((next, feature))
    }

    fn expand(&self, mut s: CaState, feature: &mut [f64]) -> CaState {
        let n = self.config.width;
        for chunk in feature.chunks_exact_mut(n) {
            s = apply_rule(&s, &self.table);
            s.write_features(chunk);
        }
        s
    }
}

impl Reservoir for Reca {
    fn feature_dim(&self) -> usize {
        self.config.feature_dim()
    }

    fn input_dim(&self) -> usize {
        self.map.inputs()
    }

    fn visit_sequence(&self, tokens: &[TokenId], visit: &mut dyn FnMut(usize, &[f64])) -> Result<()> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.map.inputs()) {
            return Err(Error::Vocabulary(format!("token id {bad} >= {}", self.map.inputs())));
        }
        let mut state = self.zero_state();
        let mut feature = vec![0.0; self.feature_dim()];
        for (t, &tok) in tokens.iter().enumerate() {
            let mixed = inject(self.map.row(tok), &state)?;
            state = self.expand(mixed, &mut feature);
            visit(t, &feature);
        }
        Ok(())
    }
}
