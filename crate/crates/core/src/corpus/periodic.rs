use alloc::vec::Vec;

use rand::Rng as _;

use super::{TokenId, Vocabulary};
use crate::seed::Rng;
use crate::Result;

/// Binary pattern of random length, either repeated verbatim until the
/// sequence holds at least `length` tokens (whole periods only), or with
/// every symbol repeated `k` times in period `k`, truncated to `length`.
pub(super) fn generate(
    min_pattern: usize,
    max_pattern: usize,
    length: usize,
    increasing: bool,
    vocab: &Vocabulary,
    rng: &mut Rng,
) -> Result<Vec<TokenId>> {
    let bits = [vocab.id("0")?, vocab.id("1")?];
    let n = rng.random_range(min_pattern..=max_pattern);
    let pattern: Vec<TokenId> = (0..n).map(|_| bits[rng.random_range(0..2)]).collect();
    Ok(if increasing {
        expand_increasing(&pattern, length)
    } else {
        let periods = length.div_ceil(n).max(2);
        pattern.iter().copied().cycle().take(n * periods).collect()
    })
}

/// `p0 p1 .. | p0 p0 p1 p1 .. | p0 p0 p0 ..` truncated to `length`.
pub(super) fn expand_increasing<T: Copy>(pattern: &[T], length: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(length);
    let mut k = 1;
    while out.len() < length {
        for &sym in pattern {
            for _ in 0..k {
                out.push(sym);
            }
        }
        k += 1;
    }
    out.truncate(length);
    out
}
