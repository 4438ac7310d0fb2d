use alloc::string::ToString;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;

use super::{words, TokenId, Vocabulary};
use crate::seed::Rng;
use crate::Result;

/// Largest count a single pattern can reach in a prompt of `max_prompt`
/// symbols: single-symbol patterns alternating with separators.
pub(super) fn max_pattern_count(max_prompt: usize) -> usize {
    max_prompt.div_ceil(2)
}

fn numeral(n: usize, vocab: &Vocabulary) -> Result<TokenId> {
    vocab.id(&n.to_string())
}

/// `S S S ... x Q n [Q n ...]` with distinct query symbols.
pub(super) fn symbols(
    n_symbols: usize,
    min_prompt: usize,
    max_prompt: usize,
    max_queries: usize,
    vocab: &Vocabulary,
    rng: &mut Rng,
) -> Result<Vec<TokenId>> {
    let ids = vocab.encode(&words::SYMBOLS[..n_symbols])?;
    let len = rng.random_range(min_prompt..=max_prompt);
    let prompt: Vec<usize> = (0..len).map(|_| rng.random_range(0..n_symbols)).collect();
    let mut out: Vec<TokenId> = prompt.iter().map(|&s| ids[s]).collect();
    out.push(vocab.id(words::QUERY)?);
    let n_queries = rng.random_range(1..=max_queries);
    for q in index::sample(rng, n_symbols, n_queries) {
        let count = prompt.iter().filter(|&&s| s == q).count();
        out.push(ids[q]);
        out.push(numeral(count, vocab)?);
    }
    Ok(out)
}

/// `P y P y ... P x Q y n [Q y n ...]`: patterns of 1..=max_pattern symbols
/// separated by `y`, then queries about distinct patterns of the prompt.
pub(super) fn patterns(
    n_symbols: usize,
    min_prompt: usize,
    max_prompt: usize,
    max_pattern: usize,
    vocab: &Vocabulary,
    rng: &mut Rng,
) -> Result<Vec<TokenId>> {
    let ids = vocab.encode(&words::SYMBOLS[..n_symbols])?;
    let sep = vocab.id(words::SEPARATOR)?;
    let budget = rng.random_range(min_prompt..=max_prompt);

    let mut pats: Vec<Vec<TokenId>> = Vec::new();
    let mut remaining = budget;
    loop {
        let len = rng.random_range(1..=max_pattern).min(remaining);
        pats.push((0..len).map(|_| ids[rng.random_range(0..n_symbols)]).collect());
        remaining -= len;
        // A separator is only worth emitting if a pattern can follow it.
        if remaining < 2 {
            break;
        }
        remaining -= 1;
    }

    let mut distinct: Vec<&Vec<TokenId>> = Vec::new();
    for p in &pats {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }

    let mut out = Vec::with_capacity(budget * 2);
    for (i, p) in pats.iter().enumerate() {
        if i > 0 {
            out.push(sep);
        }
        out.extend_from_slice(p);
    }
    out.push(vocab.id(words::QUERY)?);
    let n_queries = rng.random_range(1..=distinct.len());
    for q in index::sample(rng, distinct.len(), n_queries) {
        let query = distinct[q];
        let count = pats.iter().filter(|p| *p == query).count();
        out.extend_from_slice(query);
        out.push(sep);
        out.push(numeral(count, vocab)?);
    }
    Ok(out)
}
