use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wadebench::config::KvConfig;
use wadebench::dataset::write_dataset;
use wadebench::evalserve::{self, AppState};
use wadebench::harness::{
    aggregate, export, format_table, import_records, parse_checkpoints, run_experiment_with, summaries_to_csv,
    sweep_rules, ExperimentPlan,
};
use wadebench::{Error, Result};
use wadebench_core::corpus::{generate, TaskSpec};
use wadebench_core::metric::{wade, AccuracyCurve};

#[derive(Parser)]
#[command(name = "wadebench", version, about = "Sequence-learning benchmark with WADE scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PlanFlags {
    /// Task ids, comma separated [default: 1]
    #[arg(long, value_delimiter = ',')]
    task: Vec<u8>,
    /// Runs per (task, model) [default: 10]
    #[arg(long)]
    runs: Option<usize>,
    /// Root seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Sequences generated per run [default: 1200]
    #[arg(long)]
    count: Option<usize>,
    /// Evaluation cadence: N, or DENSE_EVERY,DENSE_UNTIL,SPARSE_EVERY [default: 10,100,50]
    #[arg(long)]
    cadence: Option<String>,
    /// WADE checkpoints: a count N for 1/N..1, or a comma list [default: 10]
    #[arg(long)]
    checkpoints: Option<String>,
}

impl PlanFlags {
    fn apply(&self, cfg: &mut KvConfig) {
        if !self.task.is_empty() {
            cfg.set("tasks", join(&self.task));
        }
        let pairs = [
            ("runs", self.runs.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("count", self.count.map(|v| v.to_string())),
            ("cadence", self.cadence.clone()),
            ("checkpoints", self.checkpoints.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v);
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset file
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        task: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1200)]
        count: usize,
        /// Output file; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment plan; flags override the plan file
    Run {
        /// Key-value plan file
        plan: Option<PathBuf>,
        #[command(flatten)]
        flags: PlanFlags,
        /// Models: esn, reca[:RULE], rnn, lstm [default: esn]
        #[arg(long, value_delimiter = ',')]
        model: Vec<String>,
        /// Directory for records.jsonl and curve CSVs
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Compare CA rules and report the best per task
    Sweep {
        plan: Option<PathBuf>,
        #[command(flatten)]
        flags: PlanFlags,
        /// Rules to try, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        rule: Vec<u8>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Print the WADE of an accuracy-curve CSV (`step,accuracy`)
    Wade {
        curve: PathBuf,
        #[arg(long, default_value = "10")]
        checkpoints: String,
    },
    /// Print mean ± std tables of a records file
    Report {
        records: PathBuf,
        /// Also write the summary as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the human-evaluation HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append accepted answers to this file
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_plan(plan: Option<&Path>, flags: &PlanFlags, models: &[String]) -> Result<ExperimentPlan> {
    let mut cfg = match plan {
        Some(p) => KvConfig::parse(&read(p)?, &p.display().to_string())?,
        None => KvConfig::new(),
    };
    flags.apply(&mut cfg);
    if !models.is_empty() {
        cfg.set("models", join(models));
    }
    ExperimentPlan::from_config(&cfg)
}

/// Fixed-point with trailing zeros removed, keeping one decimal.
fn short(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

fn progress(r: &wadebench::harness::RunRecord) {
    match &r.error {
        None => eprintln!("task {} {} run {}: wade {:.4} final {:.4} ({} ms)", r.task, r.model, r.run, r.wade, r.final_accuracy, r.wall_ms),
        Some(e) => eprintln!("task {} {} run {}: failed: {e}", r.task, r.model, r.run),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { task, seed, count, out } => {
            let ds = generate(&TaskSpec::new(task)?, seed, count)?;
            let text = write_dataset(&ds)?;
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Run { plan, flags, model, out } => {
            let plan = load_plan(plan.as_deref(), &flags, &model)?;
            let records = run_experiment_with(&plan, &progress)?;
            let files = export(&records, &out)?;
            let s = aggregate(&records);
            print!("{}", format_table(&s, "WADE", |s| (s.wade_mean, s.wade_std)));
            println!();
            print!("{}", format_table(&s, "max accuracy", |s| (s.max_accuracy_mean, s.max_accuracy_std)));
            eprintln!("records written to {}", files.records.display());
        }
        Command::Sweep { plan, flags, rule, out } => {
            let plan = load_plan(plan.as_deref(), &flags, &[])?;
            let outcome = sweep_rules(&plan, &rule)?;
            let files = export(&outcome.records, &out)?;
            println!("task,rule,mean_wade");
            for s in &outcome.scores {
                println!("{},{},{:?}", s.task, s.rule, s.mean_wade);
            }
            for b in &outcome.best {
                eprintln!("task {}: best rule {} (mean WADE {:.4})", b.task, b.rule, b.mean_wade);
            }
            eprintln!("records written to {}", files.records.display());
        }
        Command::Wade { curve, checkpoints } => {
            let c = AccuracyCurve::from_csv(&read(&curve)?)?;
            println!("{}", short(wade(&c, &parse_checkpoints(&checkpoints)?)));
        }
        Command::Report { records, out } => {
            let s = aggregate(&import_records(&records)?);
            print!("{}", format_table(&s, "WADE", |s| (s.wade_mean, s.wade_std)));
            println!();
            print!("{}", format_table(&s, "max accuracy", |s| (s.max_accuracy_mean, s.max_accuracy_std)));
            if let Some(p) = out {
                write(&p, &summaries_to_csv(&s))?;
            }
        }
        Command::Serve { port, seed, transcript } => {
            let state = match transcript {
                Some(p) => AppState::with_transcript(seed, p)?,
                None => AppState::new(seed),
            };
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::usage(format!("runtime: {e}")))?;
            eprintln!("listening on http://{addr}");
            rt.block_on(evalserve::serve(addr, state))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            if matches!(e, Error::Usage(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
