use alloc::vec;
use alloc::vec::Vec;

use super::periodic::expand_increasing;
use super::words;

/// Marks the positions whose token can be inferred from its prefix.
///
/// - tasks 1 and 2: every position from the start of the second period
/// - task 3: each count following a queried symbol
/// - task 4: each count following a query separator
/// - tasks 5 to 10: each answer following a `?`
pub fn derive_mask(task: u8, tokens: &[&str]) -> Vec<bool> {
    let mut mask = vec![false; tokens.len()];
    match task {
        1 | 2 => {
            let start = if task == 1 {
                smallest_period(tokens)
            } else {
                smallest_increasing_pattern(tokens)
            };
            for m in mask.iter_mut().skip(start) {
                *m = true;
            }
        }
        3 => {
            if let Some(q) = tokens.iter().position(|&t| t == words::QUERY) {
                for i in (q + 2..tokens.len()).step_by(2) {
                    mask[i] = true;
                }
            }
        }
        4 => {
            if let Some(q) = tokens.iter().position(|&t| t == words::QUERY) {
                for i in q + 1..tokens.len() {
                    if tokens[i - 1] == words::SEPARATOR {
                        mask[i] = true;
                    }
                }
            }
        }
        _ => {
            for i in 1..tokens.len() {
                if tokens[i - 1] == words::ASK {
                    mask[i] = true;
                }
            }
        }
    }
    mask
}

fn smallest_period(tokens: &[&str]) -> usize {
    (1..=tokens.len())
        .find(|&p| (p..tokens.len()).all(|i| tokens[i] == tokens[i - p]))
        .unwrap_or(tokens.len())
}

fn smallest_increasing_pattern(tokens: &[&str]) -> usize {
    (1..=tokens.len())
        .find(|&n| expand_increasing(&tokens[..n], tokens.len()) == tokens)
        .unwrap_or(tokens.len())
}
