use super::words;
use crate::{Error, Result};

/// Brute-force count used to check the counting tasks.
///
/// The prompt is everything before the query marker `x`. If the prompt
/// contains separators, or the query is longer than one symbol, the prompt
/// is read as separator-delimited patterns and whole patterns equal to the
/// query are counted; otherwise occurrences of the single query symbol are
/// counted.
pub fn count_oracle(tokens: &[&str], query: &[&str]) -> Result<usize> {
    let q = tokens
        .iter()
        .position(|&t| t == words::QUERY)
        .ok_or_else(|| Error::format(1, "sequence has no query marker"))?;
    let prompt = &tokens[..q];
    if prompt.is_empty() {
        return Ok(0);
    }
    let delimited = prompt.contains(&words::SEPARATOR);
    if !delimited && query.len() == 1 {
        return Ok(prompt.iter().filter(|&&t| t == query[0]).count());
    }
    Ok(prompt
        .split(|&t| t == words::SEPARATOR)
        .filter(|p| *p == query)
        .count())
}
