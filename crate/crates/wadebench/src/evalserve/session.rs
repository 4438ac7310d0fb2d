//! One human evaluation session: obfuscated questions, streak scoring.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use wadebench_core::corpus::{TaskSample, TaskSpec, TokenId, Vocabulary, TASK_COUNT};
use wadebench_core::metric::{wade, AccuracyCurve, CheckpointSet};
use wadebench_core::seed::{self, Rng};

/// Placeholder shown at hidden positions.
pub const BLANK: &str = "_";
/// Correct answers in a row that complete a session.
pub const STREAK_GOAL: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("session is finished")]
    Finished,
    #[error("expected {expected} answers, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("no answers have been scored yet")]
    NoScore,
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Finished => "session_finished",
            SessionError::Arity { .. } => "arity_mismatch",
            SessionError::NoScore => "no_score",
        }
    }
}

/// A question as shown to the participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Question {
    pub sequence: Vec<String>,
    pub hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub correct: bool,
    /// The answered question with every position visible.
    pub revealed: Vec<String>,
    pub streak: u32,
    /// `None` once the session has finished.
    pub next: Option<Question>,
    pub task_switched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub curve: Vec<(u64, f64)>,
    pub wade: f64,
}

/// Symbols for a vocabulary of `n` tokens: single letters while they
/// suffice, otherwise two-letter codes.
fn alphabet(n: usize) -> Vec<String> {
    let letters: Vec<char> = ('A'..='Z').chain('a'..='z').collect();
    if n <= letters.len() {
        letters.iter().map(|c| c.to_string()).collect()
    } else {
        letters.iter().flat_map(|a| letters.iter().map(move |b| format!("{a}{b}"))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EvalSession {
    rng: Rng,
    task: TaskSpec,
    vocab: Vocabulary,
    /// Symbol of every token id.
    symbols: Vec<String>,
    current: TaskSample,
    /// 1-based index of the current question.
    question: u64,
    streak: u32,
    streak_start: u64,
    outcomes: Vec<bool>,
    points: Vec<(u64, f64)>,
    finished: bool,
}

impl EvalSession {
    /// Draws a task uniformly and a fresh obfuscation map from `seed`.
    pub fn new(seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let task_id = rng.random_range(1..=TASK_COUNT);
        let task = TaskSpec::new(task_id).expect("built-in task ids are valid");
        let vocab = task.vocabulary().expect("built-in vocabularies are valid");
        let mut symbols = alphabet(vocab.len());
        symbols.shuffle(&mut rng);
        symbols.truncate(vocab.len());
        let current = task.sample(&vocab, &mut rng).expect("built-in tasks sample");
        EvalSession {
            rng,
            task,
            vocab,
            symbols,
            current,
            question: 1,
            streak: 0,
            streak_start: 0,
            outcomes: Vec::new(),
            points: Vec::new(),
            finished: false,
        }
    }

    pub fn task(&self) -> u8 {
        self.task.id()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn streak(&self) -> u32 {
        self.streak
    }

    /// Verdict of every answered question, in order.
    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn symbol(&self, token: TokenId) -> &str {
        &self.symbols[token]
    }

    /// Maps served symbols back to token ids; `None` for unknown symbols.
    pub fn deobfuscate(&self, symbols: &[String]) -> Option<Vec<TokenId>> {
        symbols.iter().map(|s| self.symbols.iter().position(|t| t == s)).collect()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Ground truth of the current question.
    pub fn current_sample(&self) -> &TaskSample {
        &self.current
    }

    /// Obfuscated answers that would be judged correct.
    pub fn expected_answers(&self) -> Vec<String> {
        self.current.masked_positions().map(|p| self.symbols[self.current.tokens()[p]].clone()).collect()
    }

    fn revealed(&self) -> Vec<String> {
        self.current.tokens().iter().map(|&t| self.symbols[t].clone()).collect()
    }

    pub fn question(&self) -> Question {
        let mut sequence = self.revealed();
        let hidden: Vec<usize> = self.current.masked_positions().collect();
        for &p in &hidden {
            sequence[p] = BLANK.to_string();
        }
        Question { sequence, hidden }
    }

    fn close_streak(&mut self) {
        if self.streak > 0 {
            self.points.push((self.streak_start, self.streak as f64 / STREAK_GOAL as f64));
        }
        self.streak = 0;
    }

    pub fn submit(&mut self, answers: &[String]) -> Result<Verdict, SessionError> {
        if self.finished {
            return Err(SessionError::Finished);
        }
        let expected = self.expected_answers();
        if answers.len() != expected.len() {
            return Err(SessionError::Arity { expected: expected.len(), found: answers.len() });
        }
        let correct = answers.iter().map(|a| a.trim()).eq(expected.iter().map(String::as_str));
        let revealed = self.revealed();
        self.outcomes.push(correct);
        if correct {
            if self.streak == 0 {
                self.streak_start = self.question;
            }
            self.streak += 1;
        } else {
            self.close_streak();
        }
        let streak = self.streak;
        if streak == STREAK_GOAL {
            self.close_streak();
            self.finished = true;
            return Ok(Verdict { correct, revealed, streak, next: None, task_switched: true });
        }
        self.question += 1;
        self.current = self.task.sample(&self.vocab, &mut self.rng).expect("built-in tasks sample");
        Ok(Verdict { correct, revealed, streak, next: Some(self.question()), task_switched: false })
    }

    /// Streak points so far and their WADE. A streak still in progress
    /// contributes nothing until it ends.
    pub fn score(&self) -> Result<Score, SessionError> {
        if self.outcomes.is_empty() {
            return Err(SessionError::NoScore);
        }
        let curve = AccuracyCurve::new(self.points.clone()).expect("streak starts increase");
        let w = wade(&curve, &CheckpointSet::default());
        Ok(Score { curve: self.points.clone(), wade: w })
    }

    /// Rebuilds a session from its seed and answer transcript.
    pub fn replay(seed: u64, transcript: &[Vec<String>]) -> Result<Self, SessionError> {
        let mut s = EvalSession::new(seed);
        for answers in transcript {
            s.submit(answers)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrong(s: &EvalSession) -> Vec<String> {
        s.expected_answers()
            .iter()
            .map(|a| if a == s.symbol(0) { s.symbol(1).to_string() } else { s.symbol(0).to_string() })
            .collect()
    }

    fn answer(s: &mut EvalSession, ok: bool) -> Verdict {
        let a = if ok { s.expected_answers() } else { wrong(s) };
        s.submit(&a).unwrap()
    }

    #[test]
    fn map_is_a_bijection_onto_symbols() {
        for seed in 0..40 {
            let s = EvalSession::new(seed);
            let mut seen = s.symbols.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), s.vocab.len());
            assert!(s.symbols.iter().all(|x| x.chars().all(|c| c.is_ascii_alphabetic())));
            let q = s.question();
            assert_eq!(q.hidden.len(), s.current.masked_count());
            assert!(!q.sequence.iter().any(|t| s.vocab.tokens().contains(t) && t.len() > 2));
            assert_eq!(s.deobfuscate(&s.revealed()).unwrap(), s.current.tokens());
        }
    }

    #[test]
    fn ten_correct_from_the_start() {
        let mut s = EvalSession::new(3);
        for i in 1..=10 {
            let v = answer(&mut s, true);
            assert_eq!(v.streak, i);
            assert_eq!(v.task_switched, i == 10);
        }
        assert!(s.is_finished());
        let score = s.score().unwrap();
        assert_eq!(score.curve, vec![(1, 1.0)]);
        assert_eq!(score.wade, 1.0);
        assert_eq!(s.submit(&[]), Err(SessionError::Finished));
    }

    #[test]
    fn three_then_wrong() {
        let mut s = EvalSession::new(5);
        for _ in 0..3 {
            answer(&mut s, true);
        }
        assert!(s.score().unwrap().curve.is_empty());
        let v = answer(&mut s, false);
        assert_eq!(v.streak, 0);
        assert_eq!(s.score().unwrap().curve, vec![(1, 0.3)]);
    }

    #[test]
    fn five_streak_from_question_six() {
        let mut s = EvalSession::new(8);
        for _ in 0..5 {
            answer(&mut s, false);
        }
        for _ in 0..5 {
            answer(&mut s, true);
        }
        answer(&mut s, false);
        assert_eq!(s.score().unwrap().curve, vec![(6, 0.5)]);
    }

    #[test]
    fn no_correct_answers_score_zero() {
        let mut s = EvalSession::new(1);
        assert_eq!(s.score(), Err(SessionError::NoScore));
        answer(&mut s, false);
        let score = s.score().unwrap();
        assert!(score.curve.is_empty());
        assert_eq!(score.wade, 0.0);
    }

    #[test]
    fn arity_is_checked() {
        let mut s = EvalSession::new(2);
        let mut a = s.expected_answers();
        a.push("Q".into());
        assert!(matches!(s.submit(&a), Err(SessionError::Arity { .. })));
        assert!(s.outcomes().is_empty());
    }

    #[test]
    fn replay_reproduces_score() {
        let mut s = EvalSession::new(11);
        let mut log = Vec::new();
        for i in 0..14 {
            let a = if i % 4 == 3 { wrong(&s) } else { s.expected_answers() };
            log.push(a.clone());
            s.submit(&a).unwrap();
        }
        let again = EvalSession::replay(11, &log).unwrap();
        assert_eq!(again.score(), s.score());
        assert_eq!(again.outcomes(), s.outcomes());
    }

    #[test]
    fn sessions_draw_different_maps() {
        let a = EvalSession::new(100);
        let b = EvalSession::new(101);
        assert!(a.task() != b.task() || a.symbols != b.symbols);
    }
}
