//! Dataset text files.
//!
//! ```text
//! # wadebench dataset
//! # task = 3
//! # seed = 7
//! # count = 2
//! # symbols = 3
//! # ...task parameters...
//! # vocabulary = A B C x 0 1 2 ...
//! A B A x A 2
//! 0 0 0 0 0 1
//! C x C 1
//! 0 0 0 1
//! ```
//!
//! Each sample is a line of space-separated tokens followed by a line of
//! 0/1 mask flags.

use std::fmt::Write as _;

use wadebench_core::corpus::{Dataset, TaskParams, TaskSample, TaskSpec, Vocabulary};

use crate::config::KvConfig;
use crate::{Error, Result};

const MAGIC: &str = "# wadebench dataset";

pub fn write_dataset(ds: &Dataset) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# task = {}", ds.spec.id());
    let _ = writeln!(out, "# seed = {}", ds.seed);
    let _ = writeln!(out, "# count = {}", ds.samples.len());
    for (k, v) in ds.spec.describe() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# vocabulary = {}", ds.vocabulary.tokens().join(" "));
    for s in &ds.samples {
        let _ = writeln!(out, "{}", ds.vocabulary.decode(s.tokens())?.join(" "));
        let flags: Vec<&str> = s.mask().iter().map(|&m| if m { "1" } else { "0" }).collect();
        let _ = writeln!(out, "{}", flags.join(" "));
    }
    Ok(out)
}

/// Applies `key = value` parameters from a header to the default spec of `task`.
pub fn spec_from_header(task: u8, header: &KvConfig) -> Result<TaskSpec> {
    let spec = TaskSpec::new(task)?;
    let mut params = spec.params().clone();
    let set_usize = |key: &str, field: &mut usize| -> Result<()> {
        if let Some(v) = header.get_parsed::<usize>(key)? {
            *field = v;
        }
        Ok(())
    };
    match &mut params {
        TaskParams::Periodic { min_pattern, max_pattern, length, increasing } => {
            set_usize("min_pattern", min_pattern)?;
            set_usize("max_pattern", max_pattern)?;
            set_usize("length", length)?;
            if let Some(v) = header.get_parsed::<bool>("increasing")? {
                *increasing = v;
            }
        }
        TaskParams::SymbolCounting { symbols, min_prompt, max_prompt, max_queries } => {
            set_usize("symbols", symbols)?;
            set_usize("min_prompt", min_prompt)?;
            set_usize("max_prompt", max_prompt)?;
            set_usize("max_queries", max_queries)?;
        }
        TaskParams::PatternCounting { symbols, min_prompt, max_prompt, max_pattern } => {
            set_usize("symbols", symbols)?;
            set_usize("min_prompt", min_prompt)?;
            set_usize("max_prompt", max_prompt)?;
            set_usize("max_pattern", max_pattern)?;
        }
        TaskParams::Qa(p) => {
            set_usize("names", &mut p.names)?;
            set_usize("verbs", &mut p.verbs)?;
            set_usize("colors", &mut p.colors)?;
            set_usize("sizes", &mut p.sizes)?;
            set_usize("min_names", &mut p.min_names)?;
            set_usize("max_names", &mut p.max_names)?;
            set_usize("min_statements", &mut p.min_statements)?;
            set_usize("max_statements", &mut p.max_statements)?;
            set_usize("min_questions", &mut p.min_questions)?;
            set_usize("max_questions", &mut p.max_questions)?;
            if let Some(v) = header.get_parsed::<bool>("counting")? {
                p.counting = v;
            }
        }
    }
    Ok(TaskSpec::with_params(task, params)?)
}

pub fn read_dataset(text: &str, source: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(Error::parse(source, 1, "missing dataset header")),
    }
    let mut header_text = String::new();
    while let Some((_, l)) = lines.peek() {
        let Some(rest) = l.strip_prefix('#') else { break };
        header_text.push_str(rest);
        header_text.push('\n');
        lines.next();
    }
    let header = KvConfig::parse(&header_text, source)?;
    let required = |key: &str| {
        header.get(key).ok_or_else(|| Error::parse(source, 1, format!("header lacks `{key}`")))
    };
    required("task")?;
    let task: u8 = header.get_parsed("task")?.expect("checked");
    let seed: u64 = header.get_parsed("seed")?.ok_or_else(|| Error::parse(source, 1, "header lacks `seed`"))?;
    let count: usize = header.get_parsed("count")?.ok_or_else(|| Error::parse(source, 1, "header lacks `count`"))?;
    let vocabulary = Vocabulary::new(required("vocabulary")?.split_whitespace())?;
    let spec = spec_from_header(task, &header)?;
    if spec.vocabulary()? != vocabulary {
        return Err(Error::parse(source, 1, "vocabulary does not match the task parameters"));
    }

    let mut samples = Vec::with_capacity(count);
    while let Some((i, token_line)) = lines.next() {
        if token_line.trim().is_empty() {
            continue;
        }
        let surfaces: Vec<&str> = token_line.split_whitespace().collect();
        let tokens = vocabulary
            .encode(&surfaces)
            .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        let (j, mask_line) = lines.next().ok_or_else(|| Error::parse(source, i + 2, "missing mask line"))?;
        let mask = mask_line
            .split_whitespace()
            .map(|f| match f {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::parse(source, j + 1, format!("mask flag `{other}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        let sample = TaskSample::new(tokens, mask).map_err(|e| Error::parse(source, j + 1, e.to_string()))?;
        samples.push(sample);
    }
    if samples.len() != count {
        return Err(Error::parse(source, 1, format!("header declares {count} samples, found {}", samples.len())));
    }
    Ok(Dataset { spec, seed, vocabulary, samples, split: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wadebench_core::corpus::generate;

    #[test]
    fn round_trip_every_task() {
        for task in 1..=10 {
            let ds = generate(&TaskSpec::new(task).unwrap(), 3, 25).unwrap();
            let text = write_dataset(&ds).unwrap();
            assert_eq!(read_dataset(&text, "mem").unwrap(), ds);
        }
    }

    #[test]
    fn rejects_damaged_files() {
        let ds = generate(&TaskSpec::new(3).unwrap(), 3, 2).unwrap();
        let text = write_dataset(&ds).unwrap();
        assert!(read_dataset("hello", "mem").is_err());
        let bad_mask = text.replacen("\n0 ", "\n2 ", 1);
        assert!(matches!(read_dataset(&bad_mask, "mem"), Err(Error::Parse { .. })));
        let truncated: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(read_dataset(&truncated, "mem").is_err());
        let wrong_count = text.replace("# count = 2", "# count = 3");
        assert!(read_dataset(&wrong_count, "mem").is_err());
    }

    #[test]
    fn header_parameters_are_applied() {
        let spec = TaskSpec::new(1).unwrap();
        let mut params = spec.params().clone();
        if let TaskParams::Periodic { length, .. } = &mut params {
            *length = 12;
        }
        let custom = TaskSpec::with_params(1, params).unwrap();
        let ds = generate(&custom, 1, 5).unwrap();
        let back = read_dataset(&write_dataset(&ds).unwrap(), "mem").unwrap();
        assert_eq!(back.spec, custom);
    }
}
