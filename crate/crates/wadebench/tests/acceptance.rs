//! Acceptance gate. Every criterion prints one PASS or FAIL line; the test
//! fails if any criterion does.
//!
//! Run with `cargo test --release -p wadebench --test acceptance -- --nocapture`
//! to see the lines as they are produced.

use std::time::Instant;

use rand::Rng;
use wadebench::dataset::write_dataset;
use wadebench::harness::{export, run_experiment, sweep_rules, ExperimentPlan, RunRecord};
use wadebench::model::ModelSpec;
use wadebench_core::baseline::{match_hidden_size, Lstm, LstmConfig, Rnn, RnnConfig, SequenceModel};
use wadebench_core::corpus::{count_oracle, generate, TaskSpec};
use wadebench_core::metric::{wade, AccuracyCurve, CheckpointSet};
use wadebench_core::reservoir::{ca_rule_table, ca_step, inject, CaState};
use wadebench_core::seed;

type Verdict = Result<String, String>;

struct Gate {
    failed: Vec<&'static str>,
}

impl Gate {
    fn check(&mut self, name: &'static str, f: impl FnOnce() -> Verdict) {
        let started = Instant::now();
        let v = f();
        let secs = started.elapsed().as_secs_f64();
        match v {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("FAIL {name}: {detail} [{secs:.1}s]");
                self.failed.push(name);
            }
        }
    }
}

fn ensure(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn naive_wade(points: &[(u64, f64)], thresholds: &[f64]) -> f64 {
    let den: f64 = thresholds.iter().sum();
    let num: f64 = thresholds
        .iter()
        .map(|&a| points.iter().filter(|p| p.1 >= a).map(|p| p.0).min().map_or(0.0, |t| a / t as f64))
        .sum();
    num / den
}

fn random_curve(rng: &mut seed::Rng) -> Vec<(u64, f64)> {
    let mut step = 0;
    (0..rng.random_range(0..30))
        .map(|_| {
            step += rng.random_range(1..50u64);
            (step, rng.random_range(0.0..=1.0))
        })
        .collect()
}

fn metric_hand_cases() -> Verdict {
    let set = CheckpointSet::default();
    let hand = wade(&AccuracyCurve::new(vec![(1, 0.2), (2, 0.5), (3, 0.5), (4, 0.9)]).unwrap(), &set);
    let perfect = wade(&AccuracyCurve::new(vec![(1, 1.0)]).unwrap(), &set);
    let zero = wade(&AccuracyCurve::new(vec![(1, 0.0), (50, 0.0)]).unwrap(), &set);
    ensure(
        (hand - 0.3).abs() <= 1e-12 && perfect == 1.0 && zero == 0.0,
        format!("hand {hand:?}, perfect {perfect:?}, zero {zero:?}"),
    )
}

fn metric_properties() -> Verdict {
    let mut rng = seed::rng(1);
    let set = CheckpointSet::default();
    let mut failures = 0;
    for _ in 0..1000 {
        let points = random_curve(&mut rng);
        let mut thresholds: Vec<f64> = (0..rng.random_range(1..15)).map(|_| rng.random_range(1..=1000) as f64 / 1000.0).collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let curve = AccuracyCurve::new(points.clone()).unwrap();
        let w = wade(&curve, &CheckpointSet::new(thresholds.clone()).unwrap());
        let oracle_ok = (w - naive_wade(&points, &thresholds)).abs() <= 1e-12;
        let bounds_ok = (0.0..=1.0).contains(&w);
        let lifted: Vec<_> = points.iter().map(|&(s, a)| (s, (a + rng.random_range(0.0..0.5)).min(1.0))).collect();
        let dominance_ok = wade(&AccuracyCurve::new(lifted).unwrap(), &set) >= wade(&curve, &set);
        let factor = rng.random_range(2..10u64);
        let slow: Vec<_> = points.iter().map(|&(s, a)| (s * factor, a)).collect();
        let dilation_ok = wade(&AccuracyCurve::new(slow).unwrap(), &set) <= wade(&curve, &set);
        failures += !(oracle_ok && bounds_ok && dominance_ok && dilation_ok) as usize;
    }
    ensure(failures == 0, format!("{failures} failures over 1000 random curves"))
}

fn reference_step(cells: &[bool], rule: u8) -> Vec<bool> {
    let n = cells.len();
    (0..n)
        .map(|i| {
            let idx = (cells[(i + n - 1) % n] as u8) << 2 | (cells[i] as u8) << 1 | cells[(i + 1) % n] as u8;
            (rule >> idx) & 1 == 1
        })
        .collect()
}

fn ca_tables_and_steps() -> Verdict {
    let mut cells_checked = 0;
    for rule in 0..=255u32 {
        let t = ca_rule_table(rule).unwrap();
        for (k, &bit) in t.iter().enumerate() {
            if bit != ((rule >> k) & 1 == 1) {
                return Err(format!("rule {rule} neighbourhood {k}"));
            }
            cells_checked += 1;
        }
    }
    let mut rng = seed::rng(2);
    for rule in 0..=255u8 {
        for _ in 0..100 {
            let cells: Vec<bool> = (0..12).map(|_| rng.random_bool(0.5)).collect();
            if ca_step(&CaState::from_bits(&cells), rule).to_bits() != reference_step(&cells, rule) {
                return Err(format!("ca_step disagrees for rule {rule}"));
            }
        }
    }
    ensure(cells_checked == 2048, format!("{cells_checked} table cells, 25600 grids"))
}

fn injection_and_light_cone() -> Verdict {
    let mut rng = seed::rng(3);
    for case in 0..1000 {
        let n = rng.random_range(3..200);
        let a: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let (p, s) = (CaState::from_bits(&a), CaState::from_bits(&b));
        if inject(&p, &inject(&p, &s).unwrap()).unwrap() != s {
            return Err(format!("involution fails on case {case}"));
        }
        let rule: u8 = rng.random();
        let steps = rng.random_range(1..6);
        let at = rng.random_range(0..n);
        let mut flipped = a.clone();
        flipped[at] = !flipped[at];
        let (mut x, mut y) = (p.clone(), CaState::from_bits(&flipped));
        for _ in 0..steps {
            x = ca_step(&x, rule);
            y = ca_step(&y, rule);
        }
        let (x, y) = (x.to_bits(), y.to_bits());
        let outside = (0..n).any(|i| {
            let d = (i + n - at) % n;
            x[i] != y[i] && d.min(n - d) > steps
        });
        if outside {
            return Err(format!("light cone violated on case {case}"));
        }
    }
    Ok("1000 instances".into())
}

fn worst_relative_error<M: SequenceModel>(model: &mut M, tokens: &[usize], mask: &[bool]) -> f64 {
    const EPS: f64 = 1e-4;
    let mut grad = vec![0.0; model.param_count()];
    let mut scratch = grad.clone();
    model.loss_and_gradient(tokens, mask, &mut grad).unwrap();
    let mut worst: f64 = 0.0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..model.param_count() {
        let w = model.params()[i];
        model.params_mut()[i] = w + EPS;
        let up = model.loss_and_gradient(tokens, mask, &mut scratch).unwrap();
        model.params_mut()[i] = w - EPS;
        let down = model.loss_and_gradient(tokens, mask, &mut scratch).unwrap();
        model.params_mut()[i] = w;
        let n = (up - down) / (2.0 * EPS);
        worst = worst.max((grad[i] - n).abs() / grad[i].abs().max(n.abs()).max(1e-6));
    }
    worst
}

fn gradient_fidelity() -> Verdict {
    let started = Instant::now();
    let mut rng = seed::rng(4);
    let (mut rnn_worst, mut lstm_worst): (f64, f64) = (0.0, 0.0);
    for case in 0..200u64 {
        let hidden = rng.random_range(1..=8);
        let vocab = rng.random_range(2..=5);
        let len = rng.random_range(2..=6);
        let tokens: Vec<usize> = (0..len).map(|_| rng.random_range(0..vocab)).collect();
        let mut mask: Vec<bool> = (0..len).map(|i| i > 0 && rng.random_bool(0.5)).collect();
        mask[rng.random_range(1..len)] = true;
        if case < 100 {
            let mut m = Rnn::new(RnnConfig { hidden, vocab, seed: case }).unwrap();
            rnn_worst = rnn_worst.max(worst_relative_error(&mut m, &tokens, &mask));
        } else {
            let mut m = Lstm::new(LstmConfig { hidden, vocab, seed: case }).unwrap();
            lstm_worst = lstm_worst.max(worst_relative_error(&mut m, &tokens, &mask));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(
        rnn_worst < 1e-4 && lstm_worst < 1e-4 && secs < 60.0,
        format!("max relative error rnn {rnn_worst:.2e}, lstm {lstm_worst:.2e}, {secs:.1}s"),
    )
}

fn parameter_parity() -> Verdict {
    let h = match_hidden_size(5, 9000).unwrap();
    if h != 90 {
        return Err(format!("match_hidden_size(5, 9000) = {h}"));
    }
    let mut worst = String::new();
    for task in 1..=10u8 {
        let vocab = TaskSpec::new(task).unwrap().vocabulary().unwrap().len();
        let cfg = RnnConfig::matched(vocab, 0).unwrap();
        let count = Rnn::new(cfg).unwrap().param_count() as i64;
        let gap = (count - 1800 * vocab as i64).abs();
        if gap > 2 * cfg.hidden as i64 + 1 {
            return Err(format!("task {task}: L {vocab}, h {}, {count} params", cfg.hidden));
        }
        worst.push_str(&format!(" {task}:{gap}"));
    }
    Ok(format!("h(5, 9000) = 90; |params - 1800 L| per task{worst}"))
}

fn generator_integrity() -> Verdict {
    let mut samples = 0;
    for task in [3u8, 4] {
        let ds = generate(&TaskSpec::new(task).unwrap(), 1000 + task as u64, 5000).unwrap();
        for s in &ds.samples {
            let tokens = ds.vocabulary.decode(s.tokens()).unwrap();
            let start = tokens.iter().position(|&t| t == "x").unwrap() + 1;
            let tail = &tokens[start..];
            let mut answers = Vec::new();
            if tail.contains(&"y") {
                let mut i = 0;
                while i < tail.len() {
                    let sep = i + tail[i..].iter().position(|&t| t == "y").unwrap();
                    answers.push((tail[i..sep].to_vec(), tail[sep + 1], start + sep + 1));
                    i = sep + 2;
                }
            } else {
                for (k, pair) in tail.chunks(2).enumerate() {
                    answers.push((vec![pair[0]], pair[1], start + 2 * k + 1));
                }
            }
            for (query, answer, pos) in answers {
                let truth = count_oracle(&tokens, &query).unwrap();
                if answer.parse::<usize>().ok() != Some(truth) || !s.mask()[pos] {
                    return Err(format!("task {task}: {}", tokens.join(" ")));
                }
            }
            samples += 1;
        }
    }
    let ds = generate(&TaskSpec::new(5).unwrap(), 77, 1000).unwrap();
    let (mut yes, mut total) = (0usize, 0usize);
    for s in &ds.samples {
        for p in s.masked_positions() {
            total += 1;
            yes += (ds.vocabulary.surface(s.tokens()[p]).unwrap() == "YES") as usize;
        }
    }
    let fraction = yes as f64 / total as f64;
    if !(0.45..=0.55).contains(&fraction) {
        return Err(format!("YES fraction {fraction:.3}"));
    }
    for task in 1..=10u8 {
        let spec = TaskSpec::new(task).unwrap();
        let a = write_dataset(&generate(&spec, 5, 300).unwrap()).unwrap();
        let b = write_dataset(&generate(&spec, 5, 300).unwrap()).unwrap();
        if a.as_bytes() != b.as_bytes() {
            return Err(format!("task {task} regenerates differently"));
        }
    }
    Ok(format!("{samples} counting samples match the oracle; YES fraction {fraction:.3}; 10 tasks regenerate byte-identically"))
}

fn harness_determinism() -> Verdict {
    let plan = ExperimentPlan {
        tasks: vec![1, 5],
        models: vec![ModelSpec::Esn(Default::default()), "reca:110".parse().unwrap(), ModelSpec::Rnn, ModelSpec::Lstm],
        count: 60,
        runs: 2,
        epochs: 1,
        ..Default::default()
    };
    let untimed = |r: &[RunRecord]| r.iter().map(RunRecord::without_timing).collect::<Vec<_>>();
    let a = run_experiment(&plan).unwrap();
    let b = run_experiment(&plan).unwrap();
    if untimed(&a) != untimed(&b) {
        return Err("rerun differs".into());
    }
    if let Some(r) = a.iter().find(|r| !r.succeeded()) {
        return Err(format!("run failed: {:?}", r.error));
    }
    let dir = tempfile::tempdir().unwrap();
    let files = export(&a, dir.path()).unwrap();
    for (r, path) in a.iter().zip(&files.curves) {
        let curve = AccuracyCurve::from_csv(&std::fs::read_to_string(path).unwrap()).unwrap();
        let w = wade(&curve, &CheckpointSet::new(r.checkpoints.clone()).unwrap());
        if w.to_bits() != r.wade.to_bits() {
            return Err(format!("{} re-scores to {w:?}, stored {:?}", path.display(), r.wade));
        }
    }
    Ok(format!("{} records identical on rerun; {} curve files re-score bit-for-bit", a.len(), files.curves.len()))
}

fn mean(records: &[RunRecord], model: &str, f: fn(&RunRecord) -> f64) -> f64 {
    let v: Vec<f64> = records.iter().filter(|r| r.model == model).map(f).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn all_succeeded(records: &[RunRecord]) -> Result<(), String> {
    match records.iter().find(|r| !r.succeeded()) {
        Some(r) => Err(format!("{} run {} failed: {:?}", r.model, r.run, r.error)),
        None => Ok(()),
    }
}

#[test]
fn acceptance() {
    let mut gate = Gate { failed: Vec::new() };
    gate.check("metric hand-derived and extreme curves", metric_hand_cases);
    gate.check("metric property suite", metric_properties);
    gate.check("CA rule tables and ca_step reference", ca_tables_and_steps);
    gate.check("CA injection involution and light cone", injection_and_light_cone);
    gate.check("BPTT gradients against finite differences", gradient_fidelity);
    gate.check("parameter parity", parameter_parity);
    gate.check("generator integrity", generator_integrity);
    gate.check("harness determinism and bit-exact re-scoring", harness_determinism);

    let task1 = ExperimentPlan { tasks: vec![1], runs: 10, ..Default::default() };
    let started = Instant::now();
    let esn = run_experiment(&ExperimentPlan { models: vec![ModelSpec::Esn(Default::default())], ..task1.clone() }).unwrap();
    let esn_secs = started.elapsed().as_secs_f64();
    gate.check("task 1 ESN mean final accuracy >= 0.95 within 10 minutes", || {
        all_succeeded(&esn)?;
        let acc = mean(&esn, "esn", |r| r.final_accuracy);
        ensure(acc >= 0.95 && esn_secs < 600.0, format!("mean final accuracy {acc:.4} over 10 seeds, {esn_secs:.0}s"))
    });
    let rnn1 = run_experiment(&ExperimentPlan { models: vec![ModelSpec::Rnn], ..task1 }).unwrap();
    gate.check("task 1 WADE(ESN) >= 1.5 x WADE(RNN)", || {
        all_succeeded(&rnn1)?;
        let (e, r) = (mean(&esn, "esn", |r| r.wade), mean(&rnn1, "rnn", |r| r.wade));
        ensure(e >= 1.5 * r, format!("ESN {e:.4}, RNN {r:.4}, ratio {:.2}", e / r))
    });

    let task5 = ExperimentPlan { tasks: vec![5], runs: 10, ..Default::default() };
    gate.check("task 5 best swept CA rule beats the RNN on WADE", || {
        let sweep = sweep_rules(&task5, &[30, 54, 60, 90, 105, 110, 150]).map_err(|e| e.to_string())?;
        all_succeeded(&sweep.records)?;
        let rnn = run_experiment(&ExperimentPlan { models: vec![ModelSpec::Rnn], ..task5.clone() }).unwrap();
        all_succeeded(&rnn)?;
        let best = &sweep.best[0];
        let r = mean(&rnn, "rnn", |r| r.wade);
        ensure(best.mean_wade > r, format!("rule {} mean WADE {:.4}, RNN {r:.4}", best.rule, best.mean_wade))
    });

    println!("{} criteria failed", gate.failed.len());
    assert!(gate.failed.is_empty(), "failed: {:?}", gate.failed);
}
