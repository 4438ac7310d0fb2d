//! Textual matrix dumps of trained weights.
//!
//! ```text
//! # wadebench checkpoint
//! # kind = readout
//! # rows = 1800
//! # cols = 5
//! 0.0 0.125 ...
//! ```
//!
//! One matrix row per line, values in shortest round-trip form. Readouts
//! store `W_out` (`features x classes`). Baselines store their flat
//! parameter vector as a single column, with `hidden` and `vocab` header
//! entries giving the layout.

use std::fmt::Write as _;
use std::path::Path;

use wadebench_core::baseline::{Lstm, Rnn, SequenceModel};
use wadebench_core::readout::ReadoutModel;

use crate::config::KvConfig;
use crate::error::{read_file, write_file};
use crate::{Error, Result};

const MAGIC: &str = "# wadebench checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
    /// Extra header entries besides kind and shape.
    pub meta: Vec<(String, String)>,
    /// Row-major.
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\n# kind = {}\n# rows = {}\n# cols = {}\n", self.kind, self.rows, self.cols);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for row in self.values.chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::parse(source, 1, "missing checkpoint header")),
        }
        let mut header = String::new();
        let mut body = Vec::new();
        for (i, line) in lines {
            match line.strip_prefix('#') {
                Some(h) if body.is_empty() => {
                    header.push_str(h);
                    header.push('\n');
                }
                _ => body.push((i + 1, line)),
            }
        }
        let cfg = KvConfig::parse(&header, source)?;
        let need = |k: &str| cfg.get(k).ok_or_else(|| Error::parse(source, 1, format!("header lacks `{k}`")));
        let kind = need("kind")?.to_string();
        let rows: usize = need("rows")?.parse().map_err(|_| Error::parse(source, 1, "bad rows"))?;
        let cols: usize = need("cols")?.parse().map_err(|_| Error::parse(source, 1, "bad cols"))?;
        let meta = cfg
            .keys()
            .filter(|k| !matches!(*k, "kind" | "rows" | "cols"))
            .map(|k| (k.to_string(), cfg.get(k).unwrap_or_default().to_string()))
            .collect();
        let mut values = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (n, line) in body.into_iter().filter(|(_, l)| !l.trim().is_empty()) {
            let row = line
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| Error::parse(source, n, format!("bad value `{v}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != cols {
                return Err(Error::parse(source, n, format!("expected {cols} values, found {}", row.len())));
            }
            values.extend(row);
            seen += 1;
        }
        if seen != rows {
            return Err(Error::parse(source, 1, format!("expected {rows} rows, found {seen}")));
        }
        Ok(Checkpoint { kind, rows, cols, meta, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::parse(&read_file(path)?, &path.display().to_string())
    }

    fn meta_usize(&self, key: &str) -> Result<usize> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.parse().ok())
            .ok_or_else(|| Error::usage(format!("checkpoint lacks `{key}`")))
    }

    fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::usage(format!("checkpoint holds `{}`, not `{kind}`", self.kind)));
        }
        Ok(())
    }

    pub fn from_readout(m: &ReadoutModel) -> Self {
        Checkpoint {
            kind: "readout".into(),
            rows: m.features(),
            cols: m.classes(),
            meta: vec![
                ("learning_rate".into(), format!("{:?}", m.learning_rate)),
                ("weight_decay".into(), format!("{:?}", m.weight_decay)),
            ],
            values: m.w_out(),
        }
    }

    pub fn to_readout(&self) -> Result<ReadoutModel> {
        self.expect_kind("readout")?;
        let mut m = ReadoutModel::from_weights(self.rows, self.cols, &self.values)?;
        for (k, v) in &self.meta {
            let parsed = v.parse::<f64>().map_err(|_| Error::usage(format!("bad `{k}` in checkpoint")));
            match k.as_str() {
                "learning_rate" => m.learning_rate = parsed?,
                "weight_decay" => m.weight_decay = parsed?,
                _ => {}
            }
        }
        Ok(m)
    }

    fn from_baseline(kind: &str, m: &dyn SequenceModel) -> Self {
        Checkpoint {
            kind: kind.into(),
            rows: m.param_count(),
            cols: 1,
            meta: vec![("hidden".into(), m.hidden().to_string()), ("vocab".into(), m.vocab().to_string())],
            values: m.params().to_vec(),
        }
    }

    pub fn from_rnn(m: &Rnn) -> Self {
        Checkpoint::from_baseline("rnn", m)
    }

    pub fn from_lstm(m: &Lstm) -> Self {
        Checkpoint::from_baseline("lstm", m)
    }

    pub fn to_rnn(&self) -> Result<Rnn> {
        self.expect_kind("rnn")?;
        Ok(Rnn::from_params(self.meta_usize("hidden")?, self.meta_usize("vocab")?, self.values.clone())?)
    }

    pub fn to_lstm(&self) -> Result<Lstm> {
        self.expect_kind("lstm")?;
        Ok(Lstm::from_params(self.meta_usize("hidden")?, self.meta_usize("vocab")?, self.values.clone())?)
    }
}
