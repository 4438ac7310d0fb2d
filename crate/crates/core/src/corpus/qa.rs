//! Question-answering tasks (5 to 10).
//!
//! A sample describes a small world in one or more statements and then asks
//! questions about it. Each `(verb, item)` pair is mentioned at most once,
//! so the world never contradicts itself. YES/NO questions are asked about
//! mentioned pairs only: the requested answer is drawn by a fair coin and,
//! since every mention is positive or negative with equal probability, the
//! fallback when one polarity is missing keeps the two answers balanced.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::{index, IndexedRandom};
use rand::Rng as _;

use super::words::*;
use super::{QaParams, TokenId, Vocabulary};
use crate::seed::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Fact {
    verb: usize,
    item: usize,
    size: Option<usize>,
    color: Option<usize>,
    positive: bool,
}

pub(super) fn validate(p: &QaParams) -> Result<()> {
    let items = if p.adjectives() { OBJECTS.len() } else { PEOPLE.len() };
    if p.names == 0 || p.names > items {
        return Err(Error::config(format!("QA task needs 1..={items} names, got {}", p.names)));
    }
    if p.verbs == 0 || p.verbs > VERBS.len() {
        return Err(Error::config(format!("QA task needs 1..={} verbs, got {}", VERBS.len(), p.verbs)));
    }
    if p.colors == 1 || p.colors > COLORS.len() || p.sizes == 1 || p.sizes > SIZES.len() {
        return Err(Error::config("adjective sets must be empty or hold at least two words"));
    }
    for (what, lo, hi) in [
        ("names per statement", p.min_names, p.max_names),
        ("statements", p.min_statements, p.max_statements),
        ("questions", p.min_questions, p.max_questions),
    ] {
        if lo == 0 || lo > hi {
            return Err(Error::config(format!("{what} range {lo}..={hi} is degenerate")));
        }
    }
    if p.counting && max_count(p) >= NUMBERS.len() {
        return Err(Error::config("counting answers exceed the number words"));
    }
    Ok(())
}

/// Largest possible answer to a counting question.
fn max_count(p: &QaParams) -> usize {
    let per_statement = if p.adjectives() { 1 } else { p.max_names };
    p.names.min(p.max_statements * per_statement)
}

fn items(p: &QaParams) -> &'static [&'static str] {
    if p.adjectives() {
        &OBJECTS[..p.names]
    } else {
        &PEOPLE[..p.names]
    }
}

pub(super) fn vocabulary(p: &QaParams) -> Vec<String> {
    let mut v: Vec<&str> = alloc::vec![I, DO, NOT, AND, BUT, STOP, ASK, YES, NO];
    if p.adjectives() {
        v.extend([ARTICLE, WHAT, IS, THE, OF, COLOR, SIZE]);
    }
    if p.counting {
        v.extend([HOW, MANY, THINGS]);
        v.extend(&NUMBERS[..=max_count(p)]);
    }
    v.extend(items(p));
    v.extend(&VERBS[..p.verbs]);
    v.extend(&COLORS[..p.colors]);
    v.extend(&SIZES[..p.sizes]);
    v.into_iter().map(ToString::to_string).collect()
}

pub(super) fn answer_tokens(p: &QaParams) -> Vec<String> {
    let mut v: Vec<&str> = alloc::vec![YES, NO];
    if p.counting {
        v.extend(&NUMBERS[..=max_count(p)]);
    }
    v.extend(&COLORS[..p.colors]);
    v.extend(&SIZES[..p.sizes]);
    v.into_iter().map(ToString::to_string).collect()
}

/// `I V P1 AND P2 BUT I DO NOT V N1 AND N2 .`
pub fn render_people_statement<'a>(verb: &'a str, positive: &[&'a str], negative: &[&'a str]) -> Vec<&'a str> {
    let mut out = Vec::new();
    let list = |out: &mut Vec<&'a str>, names: &[&'a str]| {
        for (i, n) in names.iter().enumerate() {
            if i > 0 {
                out.push(AND);
            }
            out.push(n);
        }
    };
    if !positive.is_empty() {
        out.extend([I, verb]);
        list(&mut out, positive);
    }
    if !negative.is_empty() {
        if !positive.is_empty() {
            out.push(BUT);
        }
        out.extend([I, DO, NOT, verb]);
        list(&mut out, negative);
    }
    out.push(STOP);
    out
}

/// `DO I V NAME ? YES|NO`
pub fn render_people_question<'a>(verb: &'a str, name: &'a str, answer: bool) -> Vec<&'a str> {
    alloc::vec![DO, I, verb, name, ASK, if answer { YES } else { NO }]
}

fn coin(rng: &mut Rng) -> bool {
    rng.random_bool(0.5)
}

struct World {
    facts: Vec<Fact>,
}

impl World {
    fn mentioned(&self, verb: usize, item: usize) -> bool {
        self.facts.iter().any(|f| f.verb == verb && f.item == item)
    }

    /// Items not yet mentioned with `verb`.
    fn free_items(&self, verb: usize, n_items: usize) -> Vec<usize> {
        (0..n_items).filter(|&i| !self.mentioned(verb, i)).collect()
    }

    /// A random verb that still has unmentioned items.
    fn open_verb(&self, p: &QaParams, rng: &mut Rng) -> Option<usize> {
        let open: Vec<usize> =
            (0..p.verbs).filter(|&v| !self.free_items(v, p.names).is_empty()).collect();
        open.choose(rng).copied()
    }
}

pub(super) fn generate(p: &QaParams, vocab: &Vocabulary, rng: &mut Rng) -> Result<Vec<TokenId>> {
    let mut world = World { facts: Vec::new() };
    let mut words: Vec<&str> = Vec::new();
    let n_statements = rng.random_range(p.min_statements..=p.max_statements);
    for _ in 0..n_statements {
        let before = words.len();
        if p.adjectives() {
            adjective_statement(p, &mut world, &mut words, rng);
        } else {
            people_statement(p, &mut world, &mut words, rng);
        }
        if words.len() == before {
            break;
        }
    }

    let n_questions = rng.random_range(p.min_questions..=p.max_questions);
    for _ in 0..n_questions {
        question(p, &world, &mut words, rng);
    }
    vocab.encode(&words)
}

fn people_statement(p: &QaParams, world: &mut World, words: &mut Vec<&'static str>, rng: &mut Rng) {
    let Some(verb) = world.open_verb(p, rng) else { return };
    let free = world.free_items(verb, p.names);
    let m = rng.random_range(p.min_names..=p.max_names).min(free.len());
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for k in index::sample(rng, free.len(), m) {
        let item = free[k];
        let positive = coin(rng);
        world.facts.push(Fact { verb, item, size: None, color: None, positive });
        if positive {
            pos.push(PEOPLE[item]);
        } else {
            neg.push(PEOPLE[item]);
        }
    }
    words.extend(render_people_statement(VERBS[verb], &pos, &neg));
}

fn adjective_statement(p: &QaParams, world: &mut World, words: &mut Vec<&'static str>, rng: &mut Rng) {
    // Positive only, negative only, or positive BUT negative.
    let polarities: &[bool] = match rng.random_range(0..3) {
        0 => &[true],
        1 => &[false],
        _ => &[true, false],
    };
    let mut emitted = 0;
    for &positive in polarities {
        let Some(verb) = world.open_verb(p, rng) else { break };
        let free = world.free_items(verb, p.names);
        let item = *free.choose(rng).expect("open verb has a free item");
        let size = (p.sizes > 0 && coin(rng)).then(|| rng.random_range(0..p.sizes));
        let color = (p.colors > 0 && coin(rng)).then(|| rng.random_range(0..p.colors));
        world.facts.push(Fact { verb, item, size, color, positive });

        if emitted > 0 {
            words.push(BUT);
        }
        words.push(I);
        if !positive {
            words.extend([DO, NOT]);
        }
        words.extend([VERBS[verb], ARTICLE]);
        if let Some(s) = size {
            words.push(SIZES[s]);
        }
        if let Some(c) = color {
            words.push(COLORS[c]);
        }
        words.push(OBJECTS[item]);
        emitted += 1;
    }
    if emitted > 0 {
        words.push(STOP);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    YesNo,
    Attribute,
    Count,
}

fn question(p: &QaParams, world: &World, words: &mut Vec<&'static str>, rng: &mut Rng) {
    let attributed: Vec<&Fact> = world
        .facts
        .iter()
        .filter(|f| f.positive && (f.size.is_some() || f.color.is_some()))
        .collect();
    let mut kinds = alloc::vec![Kind::YesNo];
    if !attributed.is_empty() {
        kinds.push(Kind::Attribute);
    }
    if p.counting {
        kinds.push(Kind::Count);
    }
    let names = items(p);
    match *kinds.choose(rng).expect("kinds is non-empty") {
        Kind::YesNo => {
            if !attributed.is_empty() && coin(rng) {
                let f = **attributed.choose(rng).expect("non-empty");
                let (word, set, n) = pick_attribute(p, &f, rng);
                let answer = coin(rng);
                let adjective = if answer {
                    set[word]
                } else {
                    let others: Vec<usize> = (0..n).filter(|&w| w != word).collect();
                    set[*others.choose(rng).expect("adjective sets hold two words")]
                };
                words.extend([DO, I, VERBS[f.verb], ARTICLE, adjective, names[f.item], ASK]);
                words.push(if answer { YES } else { NO });
            } else {
                let wanted = coin(rng);
                let pool: Vec<&Fact> = world.facts.iter().filter(|f| f.positive == wanted).collect();
                let pool = if pool.is_empty() {
                    world.facts.iter().collect()
                } else {
                    pool
                };
                let f = *pool.choose(rng).expect("world has at least one fact");
                words.extend([DO, I, VERBS[f.verb]]);
                if p.adjectives() {
                    words.push(ARTICLE);
                }
                words.extend([names[f.item], ASK, if f.positive { YES } else { NO }]);
            }
        }
        Kind::Attribute => {
            let f = **attributed.choose(rng).expect("non-empty");
            let (word, set, _) = pick_attribute(p, &f, rng);
            let kind = if set == &SIZES[..] { SIZE } else { COLOR };
            words.extend([WHAT, IS, THE, kind, OF, THE, names[f.item], I, VERBS[f.verb], ASK, set[word]]);
        }
        Kind::Count => {
            let mut verbs: Vec<usize> = world.facts.iter().map(|f| f.verb).collect();
            verbs.sort_unstable();
            verbs.dedup();
            let verb = *verbs.choose(rng).expect("world has at least one fact");
            let count = world.facts.iter().filter(|f| f.positive && f.verb == verb).count();
            words.extend([HOW, MANY, THINGS, DO, I, VERBS[verb], ASK, NUMBERS[count]]);
        }
    }
}

/// Picks a known attribute of `f`: (word index, word set, set size in use).
fn pick_attribute(p: &QaParams, f: &Fact, rng: &mut Rng) -> (usize, &'static [&'static str], usize) {
    match (f.size, f.color) {
        (Some(s), Some(c)) => {
            if coin(rng) {
                (s, &SIZES[..], p.sizes)
            } else {
                (c, &COLORS[..], p.colors)
            }
        }
        (Some(s), None) => (s, &SIZES[..], p.sizes),
        (None, Some(c)) => (c, &COLORS[..], p.colors),
        (None, None) => unreachable!("only attributed facts are queried"),
    }
}
