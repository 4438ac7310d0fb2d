//! Experiment plans, seeded runs, rule sweeps, aggregation and export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wadebench_core::corpus::{generate, TaskSpec, TASK_COUNT};
use wadebench_core::metric::{wade, AccuracyCurve, CheckpointSet};
use wadebench_core::protocol::Cadence;
use wadebench_core::reservoir::CaConfig;
use wadebench_core::seed;

use crate::config::KvConfig;
use crate::error::{read_file, write_file};
use crate::model::ModelSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub tasks: Vec<u8>,
    pub models: Vec<ModelSpec>,
    /// Sequences generated per run.
    pub count: usize,
    pub runs: usize,
    pub train_ratio: f64,
    /// Passes over the training set for the baselines.
    pub epochs: u32,
    /// Root of every derived seed.
    pub seed: u64,
    pub cadence: Cadence,
    pub checkpoints: CheckpointSet,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            tasks: vec![1],
            models: vec![ModelSpec::Esn(Default::default())],
            count: 1200,
            runs: 10,
            train_ratio: 0.8,
            epochs: 10,
            seed: 0,
            cadence: Cadence::default(),
            checkpoints: CheckpointSet::default(),
        }
    }
}

/// `"N"` for a uniform cadence, or `"dense_every,dense_until,sparse_every"`.
pub fn parse_cadence(s: &str) -> Result<Cadence> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<u64>().map_err(|_| Error::usage(format!("bad cadence `{s}`")));
    let c = match parts.as_slice() {
        [n] => Cadence::uniform(num(n)?),
        [a, b, c] => Cadence { dense_every: num(a)?, dense_until: num(b)?, sparse_every: num(c)? },
        _ => return Err(Error::usage(format!("bad cadence `{s}`: expected N or A,B,C"))),
    };
    c.validate()?;
    Ok(c)
}

pub fn format_cadence(c: &Cadence) -> String {
    format!("{},{},{}", c.dense_every, c.dense_until, c.sparse_every)
}

/// A count `"N"` gives `1/N, ..., 1`; otherwise a comma-separated list.
pub fn parse_checkpoints(s: &str) -> Result<CheckpointSet> {
    let s = s.trim();
    if let Ok(n) = s.parse::<usize>() {
        return Ok(CheckpointSet::evenly_spaced(n)?);
    }
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::usage(format!("bad checkpoint `{v}`"))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CheckpointSet::new(values)?)
}

pub fn format_checkpoints(c: &CheckpointSet) -> String {
    let v: Vec<String> = c.thresholds().iter().map(|t| format!("{t:?}")).collect();
    v.join(",")
}

impl ExperimentPlan {
    /// Reads a plan; keys missing from `cfg` keep their defaults.
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let mut plan = ExperimentPlan::default();
        if let Some(tasks) = cfg.get_list::<u8>("tasks")? {
            plan.tasks = tasks;
        }
        if let Some(models) = cfg.get_list::<String>("models")? {
            plan.models = models.iter().map(|m| m.parse()).collect::<Result<_>>()?;
        }
        for m in &mut plan.models {
            m.apply_overrides(cfg)?;
        }
        if let Some(v) = cfg.get_parsed("count")? {
            plan.count = v;
        }
        if let Some(v) = cfg.get_parsed("runs")? {
            plan.runs = v;
        }
        if let Some(v) = cfg.get_parsed("train_ratio")? {
            plan.train_ratio = v;
        }
        if let Some(v) = cfg.get_parsed("epochs")? {
            plan.epochs = v;
        }
        if let Some(v) = cfg.get_parsed("seed")? {
            plan.seed = v;
        }
        if let Some(v) = cfg.get("cadence") {
            plan.cadence = parse_cadence(v)?;
        }
        if let Some(v) = cfg.get("checkpoints") {
            plan.checkpoints = parse_checkpoints(v)?;
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        ExperimentPlan::from_config(&KvConfig::parse(&text, &path.display().to_string())?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() || self.models.is_empty() {
            return Err(Error::usage("plan needs at least one task and one model"));
        }
        if let Some(t) = self.tasks.iter().find(|&&t| t == 0 || t > TASK_COUNT) {
            return Err(Error::usage(format!("task {t} is not in 1..={TASK_COUNT}")));
        }
        if self.runs == 0 || self.count < 2 {
            return Err(Error::usage("plan needs runs >= 1 and count >= 2"));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::usage(format!("train ratio {} outside (0, 1)", self.train_ratio)));
        }
        self.cadence.validate()?;
        Ok(())
    }

    /// Dataset seed of `run` on `task`; the same for every model.
    pub fn data_seed(&self, task: u8, run: usize) -> u64 {
        seed::derive(self.seed, &[seed::label("data"), task as u64, run as u64])
    }

    pub fn weight_seed(&self, task: u8, run: usize, model: &str) -> u64 {
        seed::derive(self.seed, &[seed::label("weights"), task as u64, run as u64, seed::label(model)])
    }

    fn fingerprint(&self, task: &TaskSpec, model: &ModelSpec, vocab: usize) -> Result<String> {
        let mut text = String::new();
        let _ = writeln!(text, "task={}", task.id());
        for (k, v) in task.describe() {
            let _ = writeln!(text, "task.{k}={v}");
        }
        for (k, v) in model.describe(vocab, 0)? {
            if k != "seed" {
                let _ = writeln!(text, "model.{k}={v}");
            }
        }
        let _ = writeln!(text, "count={}", self.count);
        let _ = writeln!(text, "train_ratio={:?}", self.train_ratio);
        if !model.is_reservoir() {
            let _ = writeln!(text, "epochs={}", self.epochs);
        }
        let _ = writeln!(text, "cadence={}", format_cadence(&self.cadence));
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Outcome of one (task, model, run) experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: u8,
    pub model: String,
    pub run: usize,
    pub data_seed: u64,
    pub weight_seed: u64,
    /// SHA-256 of the seed-free configuration.
    pub fingerprint: String,
    pub config: BTreeMap<String, String>,
    pub checkpoints: Vec<f64>,
    pub curve: Vec<(u64, f64)>,
    pub wade: f64,
    pub max_accuracy: f64,
    pub final_accuracy: f64,
    /// Training sequences presented.
    pub sequences: u64,
    pub error: Option<String>,
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn accuracy_curve(&self) -> Result<AccuracyCurve> {
        Ok(AccuracyCurve::new(self.curve.clone())?)
    }

    /// WADE recomputed from the stored curve and checkpoints.
    pub fn rescore(&self) -> Result<f64> {
        Ok(wade(&self.accuracy_curve()?, &CheckpointSet::new(self.checkpoints.clone())?))
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    /// Copy with the wall-clock time cleared, for reproducibility checks.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord { wall_ms: 0, ..self.clone() }
    }
}

fn run_one(plan: &ExperimentPlan, task: u8, model: &ModelSpec, run: usize) -> RunRecord {
    let started = Instant::now();
    let name = model.name();
    let data_seed = plan.data_seed(task, run);
    let weight_seed = plan.weight_seed(task, run, &name);
    let mut record = RunRecord {
        task,
        model: name,
        run,
        data_seed,
        weight_seed,
        fingerprint: String::new(),
        config: BTreeMap::new(),
        checkpoints: plan.checkpoints.thresholds().to_vec(),
        curve: Vec::new(),
        wade: 0.0,
        max_accuracy: 0.0,
        final_accuracy: 0.0,
        sequences: 0,
        error: None,
        wall_ms: 0,
    };
    let result = (|| -> Result<()> {
        let spec = TaskSpec::new(task)?;
        let ds = generate(&spec, data_seed, plan.count)?
            .split(plan.train_ratio, seed::derive(data_seed, &[seed::label("split")]))?;
        let vocab = ds.vocabulary.len();
        record.fingerprint = plan.fingerprint(&spec, model, vocab)?;
        record.config = model.describe(vocab, weight_seed)?.into_iter().collect();
        let train: Vec<_> = ds.train().cloned().collect();
        let test: Vec<_> = ds.test().cloned().collect();
        let (curve, sequences) = model.train(vocab, &train, &test, &plan.cadence, plan.epochs, weight_seed)?;
        record.wade = wade(&curve, &plan.checkpoints);
        record.max_accuracy = curve.max_accuracy().unwrap_or(0.0);
        record.final_accuracy = curve.final_accuracy().unwrap_or(0.0);
        record.curve = curve.points().to_vec();
        record.sequences = sequences;
        Ok(())
    })();
    if let Err(e) = result {
        record.error = Some(format!("{}: {e}", e.code()));
    }
    record.wall_ms = started.elapsed().as_millis() as u64;
    record
}

/// Runs every (task, run, model) combination; failures are recorded, not
/// returned. Records come back ordered by task, run, then model.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<RunRecord>> {
    run_experiment_with(plan, &|_| {})
}

/// Like [`run_experiment`], calling `progress` as each run finishes.
pub fn run_experiment_with(plan: &ExperimentPlan, progress: &(dyn Fn(&RunRecord) + Sync)) -> Result<Vec<RunRecord>> {
    plan.validate()?;
    let mut jobs = Vec::new();
    for &task in &plan.tasks {
        for run in 0..plan.runs {
            for model in &plan.models {
                jobs.push((task, run, model));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(task, run, model)| {
            let r = run_one(plan, task, model, run);
            progress(&r);
            r
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleScore {
    pub task: u8,
    pub rule: u8,
    pub mean_wade: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    /// Mean WADE of every (task, rule).
    pub scores: Vec<RuleScore>,
    /// Best rule per task; ties go to the lower rule number.
    pub best: Vec<RuleScore>,
}

/// Evaluates each CA rule on the plan's tasks and runs. Reservoir
/// hyperparameters other than the rule come from the plan's first CA model,
/// or the defaults.
pub fn sweep_rules(plan: &ExperimentPlan, rules: &[u8]) -> Result<SweepOutcome> {
    if rules.is_empty() {
        return Err(wadebench_core::Error::Config("rule set is empty".into()).into());
    }
    let base = plan
        .models
        .iter()
        .find_map(|m| match m {
            ModelSpec::Reca(c) => Some(c.clone()),
            _ => None,
        })
        .unwrap_or_default();
    let mut rules = rules.to_vec();
    rules.sort_unstable();
    rules.dedup();
    let swept = ExperimentPlan {
        models: rules.iter().map(|&rule| ModelSpec::Reca(CaConfig { rule, ..base.clone() })).collect(),
        ..plan.clone()
    };
    let records = run_experiment(&swept)?;
    let mut scores = Vec::new();
    let mut best: Vec<RuleScore> = Vec::new();
    for &task in &plan.tasks {
        let mut top: Option<RuleScore> = None;
        for &rule in &rules {
            let name = format!("reca:{rule}");
            let w: Vec<f64> = records.iter().filter(|r| r.task == task && r.model == name).map(|r| r.wade).collect();
            let score = RuleScore { task, rule, mean_wade: w.iter().sum::<f64>() / w.len() as f64 };
            if top.as_ref().is_none_or(|t| score.mean_wade > t.mean_wade) {
                top = Some(score.clone());
            }
            scores.push(score);
        }
        best.extend(top);
    }
    Ok(SweepOutcome { records, scores, best })
}

/// Mean and population standard deviation of one (task, model) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task: u8,
    pub model: String,
    pub runs: usize,
    pub failures: usize,
    pub wade_mean: f64,
    pub wade_std: f64,
    pub max_accuracy_mean: f64,
    pub max_accuracy_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Groups records by (task, model) in order of first appearance. Failed
/// runs are counted but left out of the statistics.
pub fn aggregate(records: &[RunRecord]) -> Vec<Summary> {
    let mut keys: Vec<(u8, String)> = Vec::new();
    for r in records {
        if !keys.iter().any(|(t, m)| *t == r.task && *m == r.model) {
            keys.push((r.task, r.model.clone()));
        }
    }
    keys.sort_by_key(|k| k.0);
    keys.into_iter()
        .map(|(task, model)| {
            let cell: Vec<&RunRecord> = records.iter().filter(|r| r.task == task && r.model == model).collect();
            let ok: Vec<&RunRecord> = cell.iter().copied().filter(|r| r.succeeded()).collect();
            let (wade_mean, wade_std) = mean_std(&ok.iter().map(|r| r.wade).collect::<Vec<_>>());
            let (max_accuracy_mean, max_accuracy_std) =
                mean_std(&ok.iter().map(|r| r.max_accuracy).collect::<Vec<_>>());
            Summary {
                task,
                model,
                runs: ok.len(),
                failures: cell.len() - ok.len(),
                wade_mean,
                wade_std,
                max_accuracy_mean,
                max_accuracy_std,
            }
        })
        .collect()
}

pub fn summaries_to_csv(summaries: &[Summary]) -> String {
    let mut out = String::from("task,model,runs,failures,wade_mean,wade_std,max_accuracy_mean,max_accuracy_std\n");
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{:?},{:?},{:?},{:?}",
            s.task, s.model, s.runs, s.failures, s.wade_mean, s.wade_std, s.max_accuracy_mean, s.max_accuracy_std
        );
    }
    out
}

/// Tasks as rows, models as columns, cells `mean ± std`.
pub fn format_table(summaries: &[Summary], title: &str, pick: fn(&Summary) -> (f64, f64)) -> String {
    let mut models: Vec<&str> = Vec::new();
    let mut tasks: Vec<u8> = Vec::new();
    for s in summaries {
        if !models.contains(&s.model.as_str()) {
            models.push(&s.model);
        }
        if !tasks.contains(&s.task) {
            tasks.push(s.task);
        }
    }
    let cell = |task: u8, model: &str| {
        summaries
            .iter()
            .find(|s| s.task == task && s.model == model)
            .map_or("-".to_string(), |s| {
                if s.runs == 0 {
                    return "failed".to_string();
                }
                let (m, sd) = pick(s);
                format!("{m:.2} ± {sd:.2}")
            })
    };
    let mut rows = vec![std::iter::once(title.to_string()).chain(models.iter().map(|m| m.to_string())).collect::<Vec<_>>()];
    for &t in &tasks {
        rows.push(std::iter::once(format!("task {t}")).chain(models.iter().map(|m| cell(t, m))).collect());
    }
    let widths: Vec<usize> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(v, &w)| format!("{v:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn curve_file_name(r: &RunRecord) -> String {
    format!("task{}_{}_run{}.csv", r.task, r.model.replace(':', "-"), r.run)
}

/// Files written by [`export`].
#[derive(Debug, Clone, PartialEq)]
pub struct Exported {
    pub records: PathBuf,
    pub curves: Vec<PathBuf>,
}

/// Writes `records.jsonl` and one curve CSV per successful record under `dir`.
pub fn export(records: &[RunRecord], dir: &Path) -> Result<Exported> {
    if records.is_empty() {
        return Err(Error::usage("nothing to export"));
    }
    let mut lines = String::new();
    for r in records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    let records_path = dir.join("records.jsonl");
    write_file(&records_path, &lines)?;
    let mut curves = Vec::new();
    for r in records.iter().filter(|r| r.succeeded()) {
        let path = dir.join("curves").join(curve_file_name(r));
        write_file(&path, &r.accuracy_curve()?.to_csv())?;
        curves.push(path);
    }
    Ok(Exported { records: records_path, curves })
}

pub fn parse_records(text: &str, source: &str) -> Result<Vec<RunRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(source, i + 1, e.to_string())))
        .collect()
}

pub fn import_records(path: &Path) -> Result<Vec<RunRecord>> {
    parse_records(&read_file(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(task: u8, model: &str, wade: f64) -> RunRecord {
        RunRecord {
            task,
            model: model.into(),
            run: 0,
            data_seed: 0,
            weight_seed: 0,
            fingerprint: String::new(),
            config: BTreeMap::new(),
            checkpoints: vec![1.0],
            curve: vec![],
            wade,
            max_accuracy: wade,
            final_accuracy: wade,
            sequences: 0,
            error: None,
            wall_ms: 0,
        }
    }

    #[test]
    fn two_point_population_std() {
        let s = aggregate(&[record(1, "esn", 0.2), record(1, "esn", 0.4)]);
        assert_eq!(s.len(), 1);
        assert!((s[0].wade_mean - 0.3).abs() < 1e-15);
        assert!((s[0].wade_std - 0.1).abs() < 1e-15);
        let single = aggregate(&[record(2, "rnn", 0.7)]);
        assert_eq!(single[0].wade_std, 0.0);
    }

    #[test]
    fn failures_are_counted_apart() {
        let mut bad = record(1, "rnn", 0.0);
        bad.error = Some("diverged".into());
        let s = aggregate(&[record(1, "rnn", 0.5), bad]);
        assert_eq!((s[0].runs, s[0].failures), (1, 1));
        assert_eq!(s[0].wade_mean, 0.5);
    }

    #[test]
    fn table_layout() {
        let s = aggregate(&[record(1, "esn", 0.74), record(1, "rnn", 0.31), record(5, "esn", 0.2)]);
        let t = format_table(&s, "WADE", |s| (s.wade_mean, s.wade_std));
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("WADE") && lines[0].contains("esn") && lines[0].contains("rnn"));
        assert!(lines[1].contains("0.74 ± 0.00") && lines[1].contains("0.31 ± 0.00"));
        assert!(lines[2].starts_with("task 5") && lines[2].ends_with('-'));
    }

    #[test]
    fn cadence_and_checkpoint_syntax() {
        assert_eq!(parse_cadence("10,100,50").unwrap(), Cadence::default());
        assert_eq!(parse_cadence("5").unwrap(), Cadence::uniform(5));
        assert!(parse_cadence("0").is_err() && parse_cadence("1,2").is_err());
        assert_eq!(parse_checkpoints("10").unwrap(), CheckpointSet::default());
        assert_eq!(parse_checkpoints("0.5, 1.0").unwrap().thresholds(), &[0.5, 1.0]);
        assert!(parse_checkpoints("0.5,0.2").is_err());
        let c = CheckpointSet::default();
        assert_eq!(parse_checkpoints(&format_checkpoints(&c)).unwrap(), c);
    }

    #[test]
    fn plan_from_config() {
        let cfg = KvConfig::parse("tasks = 1,5\nmodels = esn, reca:90, rnn\nruns = 3\ncadence = 20\n", "p").unwrap();
        let plan = ExperimentPlan::from_config(&cfg).unwrap();
        assert_eq!(plan.tasks, vec![1, 5]);
        assert_eq!(plan.models.len(), 3);
        assert_eq!(plan.runs, 3);
        assert_eq!(plan.cadence, Cadence::uniform(20));
        let bad = KvConfig::parse("tasks = 11\n", "p").unwrap();
        assert!(ExperimentPlan::from_config(&bad).is_err());
    }

    #[test]
    fn seeds_are_shared_across_models_only_for_data() {
        let plan = ExperimentPlan::default();
        assert_eq!(plan.data_seed(1, 3), plan.data_seed(1, 3));
        assert_ne!(plan.data_seed(1, 3), plan.data_seed(1, 4));
        assert_ne!(plan.data_seed(1, 3), plan.data_seed(2, 3));
        assert_ne!(plan.weight_seed(1, 3, "esn"), plan.weight_seed(1, 3, "rnn"));
    }
}
