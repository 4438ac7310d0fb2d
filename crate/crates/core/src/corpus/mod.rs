//! The ten benchmark tasks.
//!
//! Every task is a language-modelling problem: a sample is a token sequence
//! and a mask flagging the positions whose token can be inferred from what
//! precedes it. Binary and symbolic tasks tokenize per symbol (count answers
//! are whole numerals such as `"17"`); language tasks use word tokens.
//!
//! | id | task                                           |
//! |----|------------------------------------------------|
//! | 1  | periodic binary pattern                        |
//! | 2  | periodic pattern with an increasing period     |
//! | 3  | symbol counting                                |
//! | 4  | pattern counting                               |
//! | 5  | elementary YES/NO question answering           |
//! | 6  | the same with a larger vocabulary              |
//! | 7  | QA over a world described by several sentences |
//! | 8  | world QA with counting questions               |
//! | 9  | world QA with adjectives                       |
//! | 10 | adjective world QA with counting questions     |

mod counting;
mod mask;
mod oracle;
mod periodic;
mod qa;
mod words;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::seed::{self, Rng};
use crate::{Error, Result};

pub use mask::derive_mask;
pub use oracle::count_oracle;
pub use qa::{render_people_question, render_people_statement};

pub type TokenId = usize;

/// Bijection between token surface forms and dense ids `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (id, tok) in tokens.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::config(format!("invalid token `{tok}`")));
            }
            if index.insert(tok.clone(), id).is_some() {
                return Err(Error::config(format!("duplicate token `{tok}`")));
            }
        }
        if tokens.is_empty() {
            return Err(Error::config("vocabulary is empty"));
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, surface: &str) -> Result<TokenId> {
        self.index
            .get(surface)
            .copied()
            .ok_or_else(|| Error::Vocabulary(surface.to_string()))
    }

    pub fn surface(&self, id: TokenId) -> Result<&str> {
        self.tokens
            .get(id)
            .map(String::as_str)
            .ok_or(Error::Index { index: id, len: self.tokens.len() })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, surfaces: &[&str]) -> Result<Vec<TokenId>> {
        surfaces.iter().map(|s| self.id(s)).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Result<Vec<&str>> {
        ids.iter().map(|&i| self.surface(i)).collect()
    }
}

/// One-hot vector of length `size` with a 1 at `id`.
pub fn encode_one_hot(id: TokenId, size: usize) -> Result<Vec<f64>> {
    if id >= size {
        return Err(Error::Index { index: id, len: size });
    }
    let mut v = vec![0.0; size];
    v[id] = 1.0;
    Ok(v)
}

/// A token sequence plus the prediction mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSample {
    tokens: Vec<TokenId>,
    mask: Vec<bool>,
}

impl TaskSample {
    /// Checks the sample invariants: equal lengths of at least 2, position 0
    /// unmasked and at least one masked position.
    pub fn new(tokens: Vec<TokenId>, mask: Vec<bool>) -> Result<Self> {
        if tokens.len() != mask.len() {
            return Err(Error::shape(tokens.len(), mask.len()));
        }
        if tokens.len() < 2 {
            return Err(Error::config("samples need at least two tokens"));
        }
        if mask[0] {
            return Err(Error::config("position 0 cannot be masked"));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::config("sample has no masked position"));
        }
        Ok(TaskSample { tokens, mask })
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn masked_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Tunable generation parameters of one task.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskParams {
    /// Tasks 1 and 2.
    Periodic {
        min_pattern: usize,
        max_pattern: usize,
        /// Target sequence length.
        length: usize,
        /// Each pattern symbol is repeated `k` times in period `k`.
        increasing: bool,
    },
    /// Task 3.
    SymbolCounting { symbols: usize, min_prompt: usize, max_prompt: usize, max_queries: usize },
    /// Task 4. `max_prompt` counts pattern symbols and separators.
    PatternCounting { symbols: usize, min_prompt: usize, max_prompt: usize, max_pattern: usize },
    /// Tasks 5 to 10.
    Qa(QaParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaParams {
    pub names: usize,
    pub verbs: usize,
    /// Zero disables adjectives (tasks 5 to 8).
    pub colors: usize,
    pub sizes: usize,
    /// Names mentioned per statement (people tasks only).
    pub min_names: usize,
    pub max_names: usize,
    pub min_statements: usize,
    pub max_statements: usize,
    pub min_questions: usize,
    pub max_questions: usize,
    pub counting: bool,
}

impl QaParams {
    pub fn adjectives(&self) -> bool {
        self.colors > 0 || self.sizes > 0
    }
}

/// A task id together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    id: u8,
    params: TaskParams,
}

pub const TASK_COUNT: u8 = 10;

impl TaskSpec {
    /// The benchmark configuration of task `id` (1 to 10).
    pub fn new(id: u8) -> Result<Self> {
        let params = match id {
            1 | 2 => TaskParams::Periodic {
                min_pattern: 1,
                max_pattern: 10,
                length: 40,
                increasing: id == 2,
            },
            3 => TaskParams::SymbolCounting { symbols: 3, min_prompt: 1, max_prompt: 10, max_queries: 3 },
            4 => TaskParams::PatternCounting { symbols: 3, min_prompt: 1, max_prompt: 45, max_pattern: 3 },
            5 | 6 => TaskParams::Qa(QaParams {
                names: if id == 5 { 5 } else { 11 },
                verbs: if id == 5 { 2 } else { 5 },
                colors: 0,
                sizes: 0,
                min_names: 1,
                max_names: 5,
                min_statements: 1,
                max_statements: 1,
                min_questions: 1,
                max_questions: 1,
                counting: false,
            }),
            7 | 8 => TaskParams::Qa(QaParams {
                names: 13,
                verbs: 7,
                colors: 0,
                sizes: 0,
                min_names: 1,
                max_names: 5,
                min_statements: 1,
                max_statements: 6,
                min_questions: 1,
                max_questions: 8,
                counting: id == 8,
            }),
            9 | 10 => TaskParams::Qa(QaParams {
                names: 8,
                verbs: 6,
                colors: 4,
                sizes: 5,
                min_names: 1,
                max_names: 1,
                min_statements: 1,
                max_statements: 6,
                min_questions: 1,
                max_questions: 8,
                counting: id == 10,
            }),
            _ => return Err(Error::config(format!("task id {id} is not in 1..={TASK_COUNT}"))),
        };
        Ok(TaskSpec { id, params })
    }

    /// A task with custom parameters. The parameter family must match the id.
    pub fn with_params(id: u8, params: TaskParams) -> Result<Self> {
        let family_ok = matches!(
            (id, &params),
            (1 | 2, TaskParams::Periodic { .. })
                | (3, TaskParams::SymbolCounting { .. })
                | (4, TaskParams::PatternCounting { .. })
                | (5..=10, TaskParams::Qa(_))
        );
        if !family_ok {
            return Err(Error::config(format!("parameters do not fit task {id}")));
        }
        let spec = TaskSpec { id, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn params(&self) -> &TaskParams {
        &self.params
    }

    pub fn validate(&self) -> Result<()> {
        fn range(what: &str, lo: usize, hi: usize) -> Result<()> {
            if lo == 0 || lo > hi {
                return Err(Error::config(format!("{what} range {lo}..={hi} is degenerate")));
            }
            Ok(())
        }
        match &self.params {
            TaskParams::Periodic { min_pattern, max_pattern, length, .. } => {
                range("pattern length", *min_pattern, *max_pattern)?;
                if *length <= *max_pattern {
                    return Err(Error::config("sequence length must exceed the longest pattern"));
                }
            }
            TaskParams::SymbolCounting { symbols, min_prompt, max_prompt, max_queries } => {
                range("prompt length", *min_prompt, *max_prompt)?;
                range("query count", 1, *max_queries)?;
                if *symbols == 0 || *symbols > words::SYMBOLS.len() || *max_queries > *symbols {
                    return Err(Error::config("symbol counting needs 1..=symbols queries"));
                }
            }
            TaskParams::PatternCounting { symbols, min_prompt, max_prompt, max_pattern } => {
                range("prompt length", *min_prompt, *max_prompt)?;
                range("pattern length", 1, *max_pattern)?;
                if *symbols == 0 || *symbols > words::SYMBOLS.len() {
                    return Err(Error::config("pattern counting needs at least one symbol"));
                }
            }
            TaskParams::Qa(p) => qa::validate(p)?,
        }
        Ok(())
    }

    /// The fixed vocabulary of every token this task can emit.
    pub fn vocabulary(&self) -> Result<Vocabulary> {
        self.validate()?;
        match &self.params {
            TaskParams::Periodic { .. } => Vocabulary::new(["0", "1"]),
            TaskParams::SymbolCounting { symbols, max_prompt, .. } => {
                let mut toks: Vec<String> =
                    words::SYMBOLS[..*symbols].iter().map(|s| s.to_string()).collect();
                toks.push(words::QUERY.into());
                toks.extend((0..=*max_prompt).map(|n| n.to_string()));
                Vocabulary::new(toks)
            }
            TaskParams::PatternCounting { symbols, max_prompt, .. } => {
                let mut toks: Vec<String> =
                    words::SYMBOLS[..*symbols].iter().map(|s| s.to_string()).collect();
                toks.push(words::QUERY.into());
                toks.push(words::SEPARATOR.into());
                toks.extend((1..=counting::max_pattern_count(*max_prompt)).map(|n| n.to_string()));
                Vocabulary::new(toks)
            }
            TaskParams::Qa(p) => Vocabulary::new(qa::vocabulary(p)),
        }
    }

    /// Draws one sample.
    pub fn sample(&self, vocab: &Vocabulary, rng: &mut Rng) -> Result<TaskSample> {
        let tokens = match &self.params {
            TaskParams::Periodic { min_pattern, max_pattern, length, increasing } => {
                periodic::generate(*min_pattern, *max_pattern, *length, *increasing, vocab, rng)?
            }
            TaskParams::SymbolCounting { symbols, min_prompt, max_prompt, max_queries } => {
                counting::symbols(*symbols, *min_prompt, *max_prompt, *max_queries, vocab, rng)?
            }
            TaskParams::PatternCounting { symbols, min_prompt, max_prompt, max_pattern } => {
                counting::patterns(*symbols, *min_prompt, *max_prompt, *max_pattern, vocab, rng)?
            }
            TaskParams::Qa(p) => qa::generate(p, vocab, rng)?,
        };
        let surfaces = vocab.decode(&tokens)?;
        let mask = derive_mask(self.id, &surfaces);
        TaskSample::new(tokens, mask)
    }

    /// `key=value` description of the parameters, for file headers.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        match &self.params {
            TaskParams::Periodic { min_pattern, max_pattern, length, increasing } => vec![
                ("min_pattern", min_pattern.to_string()),
                ("max_pattern", max_pattern.to_string()),
                ("length", length.to_string()),
                ("increasing", increasing.to_string()),
            ],
            TaskParams::SymbolCounting { symbols, min_prompt, max_prompt, max_queries } => vec![
                ("symbols", symbols.to_string()),
                ("min_prompt", min_prompt.to_string()),
                ("max_prompt", max_prompt.to_string()),
                ("max_queries", max_queries.to_string()),
            ],
            TaskParams::PatternCounting { symbols, min_prompt, max_prompt, max_pattern } => vec![
                ("symbols", symbols.to_string()),
                ("min_prompt", min_prompt.to_string()),
                ("max_prompt", max_prompt.to_string()),
                ("max_pattern", max_pattern.to_string()),
            ],
            TaskParams::Qa(p) => vec![
                ("names", p.names.to_string()),
                ("verbs", p.verbs.to_string()),
                ("colors", p.colors.to_string()),
                ("sizes", p.sizes.to_string()),
                ("min_names", p.min_names.to_string()),
                ("max_names", p.max_names.to_string()),
                ("min_statements", p.min_statements.to_string()),
                ("max_statements", p.max_statements.to_string()),
                ("min_questions", p.min_questions.to_string()),
                ("max_questions", p.max_questions.to_string()),
                ("counting", p.counting.to_string()),
            ],
        }
    }

    /// Tokens that can appear at a masked position, for tasks 3 to 10.
    pub fn answer_tokens(&self) -> Result<Vec<String>> {
        let vocab = self.vocabulary()?;
        Ok(match &self.params {
            TaskParams::Periodic { .. } => vocab.tokens().to_vec(),
            TaskParams::SymbolCounting { .. } | TaskParams::PatternCounting { .. } => vocab
                .tokens()
                .iter()
                .filter(|t| t.bytes().all(|b| b.is_ascii_digit()))
                .cloned()
                .collect(),
            TaskParams::Qa(p) => qa::answer_tokens(p),
        })
    }
}

/// Train/test partition of a dataset, in presentation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Generated samples of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: TaskSpec,
    pub seed: u64,
    pub vocabulary: Vocabulary,
    pub samples: Vec<TaskSample>,
    pub split: Option<Split>,
}

/// Generates `count` independent samples; a pure function of its inputs.
pub fn generate(spec: &TaskSpec, seed: u64, count: usize) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::config("sample count must be positive"));
    }
    let vocabulary = spec.vocabulary()?;
    let mut rng = seed::rng(seed);
    let samples = (0..count)
        .map(|_| spec.sample(&vocabulary, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { spec: spec.clone(), seed, vocabulary, samples, split: None })
}

impl Dataset {
    /// Shuffles indices with `seed` and assigns the first `round(ratio * N)`
    /// to training.
    pub fn split(mut self, ratio: f64, seed: u64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::config(format!("split ratio {ratio} outside (0, 1)")));
        }
        let n = self.samples.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed::rng(seed));
        let n_train = libm::round(ratio * n as f64) as usize;
        let test = order.split_off(n_train);
        self.split = Some(Split { train: order, test });
        Ok(self)
    }

    pub fn train(&self) -> impl Iterator<Item = &TaskSample> {
        self.split.iter().flat_map(move |s| s.train.iter().map(move |&i| &self.samples[i]))
    }

    pub fn test(&self) -> impl Iterator<Item = &TaskSample> {
        self.split.iter().flat_map(move |s| s.test.iter().map(move |&i| &self.samples[i]))
    }

    pub fn train_len(&self) -> usize {
        self.split.as_ref().map_or(0, |s| s.train.len())
    }

    pub fn test_len(&self) -> usize {
        self.split.as_ref().map_or(0, |s| s.test.len())
    }
}
