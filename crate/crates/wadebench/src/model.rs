//! Model selection and per-model training protocols.

use std::fmt;
use std::str::FromStr;

use wadebench_core::baseline::{Lstm, LstmConfig, Rnn, RnnConfig};
use wadebench_core::corpus::TaskSample;
use wadebench_core::metric::AccuracyCurve;
use wadebench_core::protocol::{self, BaselineOptions, Cadence, ReadoutOptions};
use wadebench_core::reservoir::{CaConfig, Esn, EsnConfig, Reca};
use wadebench_core::seed;

use crate::config::KvConfig;
use crate::{Error, Result};

/// A model family with its frozen hyperparameters. Seeds are filled in per run.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Esn(EsnConfig),
    Reca(CaConfig),
    Rnn,
    Lstm,
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Esn(_) => "esn".into(),
            ModelSpec::Reca(c) => format!("reca:{}", c.rule),
            ModelSpec::Rnn => "rnn".into(),
            ModelSpec::Lstm => "lstm".into(),
        }
    }

    pub fn is_reservoir(&self) -> bool {
        matches!(self, ModelSpec::Esn(_) | ModelSpec::Reca(_))
    }

    /// Overrides reservoir hyperparameters from `esn.*` and `reca.*` keys.
    pub fn apply_overrides(&mut self, cfg: &KvConfig) -> Result<()> {
        match self {
            ModelSpec::Esn(c) => {
                if let Some(v) = cfg.get_parsed("esn.size")? {
                    c.size = v;
                }
                if let Some(v) = cfg.get_parsed("esn.nnz")? {
                    c.nnz_per_row = v;
                }
                if let Some(v) = cfg.get_parsed("esn.leak")? {
                    c.leak = v;
                }
                if let Some(v) = cfg.get_parsed("esn.spectral_radius")? {
                    c.spectral_radius = Some(v);
                }
                c.validate()?;
            }
            ModelSpec::Reca(c) => {
                if let Some(v) = cfg.get_parsed("reca.width")? {
                    c.width = v;
                }
                if let Some(v) = cfg.get_parsed("reca.expansion")? {
                    c.expansion = v;
                }
                if let Some(v) = cfg.get_parsed("reca.inject")? {
                    c.inject_width = v;
                }
                c.validate()?;
            }
            ModelSpec::Rnn | ModelSpec::Lstm => {}
        }
        Ok(())
    }

    /// Flat hyperparameter listing for provenance, given the vocabulary size
    /// and weight seed of a run.
    pub fn describe(&self, vocab: usize, weight_seed: u64) -> Result<Vec<(String, String)>> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        Ok(match self {
            ModelSpec::Esn(c) => vec![
                kv("model", "esn".into()),
                kv("K", c.size.to_string()),
                kv("nnz", c.nnz_per_row.to_string()),
                kv("leak", format!("{:?}", c.leak)),
                kv("spectral_radius", c.spectral_radius.map_or("off".into(), |r| format!("{r:?}"))),
                kv("seed", weight_seed.to_string()),
            ],
            ModelSpec::Reca(c) => vec![
                kv("model", "reca".into()),
                kv("rule", c.rule.to_string()),
                kv("n", c.width.to_string()),
                kv("r_expand", c.expansion.to_string()),
                kv("d_inject", c.inject_width.to_string()),
                kv("seed", weight_seed.to_string()),
            ],
            ModelSpec::Rnn => {
                let c = RnnConfig::matched(vocab, weight_seed)?;
                vec![kv("model", "rnn".into()), kv("h", c.hidden.to_string()), kv("L", vocab.to_string()), kv("seed", weight_seed.to_string())]
            }
            ModelSpec::Lstm => {
                let c = LstmConfig::matched(vocab, weight_seed)?;
                vec![kv("model", "lstm".into()), kv("h", c.hidden.to_string()), kv("L", vocab.to_string()), kv("seed", weight_seed.to_string())]
            }
        })
    }

    /// Trains a fresh model and returns its test-accuracy curve and the
    /// number of training sequences presented.
    pub fn train(
        &self,
        vocab: usize,
        train: &[TaskSample],
        test: &[TaskSample],
        cadence: &Cadence,
        epochs: u32,
        weight_seed: u64,
    ) -> Result<(AccuracyCurve, u64)> {
        let readout = ReadoutOptions::default();
        let baseline = BaselineOptions {
            epochs,
            shuffle_seed: seed::derive(weight_seed, &[seed::label("shuffle")]),
            ..BaselineOptions::default()
        };
        Ok(match self {
            ModelSpec::Esn(c) => {
                let esn = Esn::new(EsnConfig { seed: weight_seed, ..c.clone() }, vocab)?;
                let out = protocol::train_readout(&esn, vocab, train, test, cadence, &readout)?;
                (out.curve, out.sequences)
            }
            ModelSpec::Reca(c) => {
                let reca = Reca::new(CaConfig { seed: weight_seed, ..c.clone() }, vocab)?;
                let out = protocol::train_readout(&reca, vocab, train, test, cadence, &readout)?;
                (out.curve, out.sequences)
            }
            ModelSpec::Rnn => {
                let mut rnn = Rnn::new(RnnConfig::matched(vocab, weight_seed)?)?;
                let out = protocol::train_baseline(&mut rnn, train, test, cadence, &baseline)?;
                (out.curve, out.sequences)
            }
            ModelSpec::Lstm => {
                let mut lstm = Lstm::new(LstmConfig::matched(vocab, weight_seed)?)?;
                let out = protocol::train_baseline(&mut lstm, train, test, cadence, &baseline)?;
                (out.curve, out.sequences)
            }
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `esn`, `reca` (rule 110), `reca:RULE`, `rnn` or `lstm`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let model = match (head, arg) {
            ("esn", None) => ModelSpec::Esn(EsnConfig::default()),
            ("reca" | "ca", None) => ModelSpec::Reca(CaConfig::default()),
            ("reca" | "ca", Some(rule)) => {
                let rule: u8 = rule
                    .parse()
                    .map_err(|_| Error::usage(format!("CA rule `{rule}` is not in 0..=255")))?;
                ModelSpec::Reca(CaConfig { rule, ..CaConfig::default() })
            }
            ("rnn", None) => ModelSpec::Rnn,
            ("lstm", None) => ModelSpec::Lstm,
            _ => return Err(Error::usage(format!("unknown model `{s}` (expected esn, reca[:RULE], rnn or lstm)"))),
        };
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for name in ["esn", "reca:110", "reca:0", "rnn", "lstm"] {
            assert_eq!(name.parse::<ModelSpec>().unwrap().name(), name);
        }
        assert_eq!("ca:30".parse::<ModelSpec>().unwrap().name(), "reca:30");
        assert_eq!("reca".parse::<ModelSpec>().unwrap().name(), "reca:110");
        assert!("reca:256".parse::<ModelSpec>().is_err());
        assert!("gru".parse::<ModelSpec>().is_err());
        assert!("esn:3".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn overrides() {
        let cfg = KvConfig::parse("esn.size = 64\nesn.spectral_radius = 0.9\n", "t").unwrap();
        let mut m: ModelSpec = "esn".parse().unwrap();
        m.apply_overrides(&cfg).unwrap();
        let ModelSpec::Esn(c) = &m else { unreachable!() };
        assert_eq!((c.size, c.spectral_radius), (64, Some(0.9)));
        let bad = KvConfig::parse("reca.width = 2\n", "t").unwrap();
        let mut m: ModelSpec = "reca".parse().unwrap();
        assert!(m.apply_overrides(&bad).is_err());
    }

    #[test]
    fn baseline_description_has_matched_size() {
        let d = ModelSpec::Rnn.describe(5, 1).unwrap();
        assert!(d.contains(&("h".to_string(), "90".to_string())));
    }
}
