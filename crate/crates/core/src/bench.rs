//! Benchmark tasks, suite runs and metrics files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dsl::{eval, Program};
use crate::pipeline::{
    converge_examples, phase3_on_p1, run_ablation, Ablation, Objective, PipelineConfig, PipelineError,
    RunResult,
};
use crate::rank::Score;
use crate::synth::ExampleSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleJson {
    #[serde(rename = "in")]
    pub input: String,
    #[serde(rename = "out")]
    pub output: String,
}

/// On-disk task format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub name: String,
    pub objective: Objective,
    pub examples: Vec<ExampleJson>,
    pub corpus: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkTask {
    pub name: String,
    pub objective: Objective,
    pub examples: ExampleSet,
    pub corpus: Vec<String>,
    /// Intended output for each corpus input, used only to drive example selection.
    pub reference: Option<BTreeMap<String, String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed task: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Invalid {
        path: PathBuf,
        field: &'static str,
        message: String,
    },
}

impl BenchmarkTask {
    /// Checks the task invariants. `path` is only used in error messages.
    pub fn from_file(file: TaskFile, path: &Path) -> Result<Self, TaskError> {
        let invalid = |field, message: String| TaskError::Invalid {
            path: path.to_path_buf(),
            field,
            message,
        };
        if file.name.is_empty() {
            return Err(invalid("name", "must not be empty".into()));
        }
        if file.corpus.is_empty() {
            return Err(invalid("corpus", "must not be empty".into()));
        }
        if file.examples.is_empty() {
            return Err(invalid("examples", "must not be empty".into()));
        }
        for ex in &file.examples {
            if !file.corpus.contains(&ex.input) {
                return Err(invalid("examples", format!("input {:?} is not in the corpus", ex.input)));
            }
        }
        if let Some(reference) = &file.reference {
            for input in &file.corpus {
                if !reference.contains_key(input) {
                    return Err(invalid("reference", format!("no output for corpus input {input:?}")));
                }
            }
            for ex in &file.examples {
                if reference.get(&ex.input) != Some(&ex.output) {
                    return Err(invalid(
                        "reference",
                        format!("disagrees with the example for {:?}", ex.input),
                    ));
                }
            }
        }
        Ok(BenchmarkTask {
            name: file.name,
            objective: file.objective,
            examples: ExampleSet::new(file.examples.into_iter().map(|e| (e.input, e.output))),
            corpus: file.corpus,
            reference: file.reference,
        })
    }

    pub fn to_file(&self) -> TaskFile {
        TaskFile {
            name: self.name.clone(),
            objective: self.objective,
            examples: self
                .examples
                .pairs()
                .iter()
                .map(|(i, o)| ExampleJson {
                    input: i.clone(),
                    output: o.clone(),
                })
                .collect(),
            corpus: self.corpus.clone(),
            reference: self.reference.clone(),
        }
    }
}

pub fn parse_task(text: &str, path: &Path) -> Result<BenchmarkTask, TaskError> {
    let file: TaskFile = serde_json::from_str(text).map_err(|e| TaskError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    BenchmarkTask::from_file(file, path)
}

pub fn load_task(path: &Path) -> Result<BenchmarkTask, TaskError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_task(&text, path)
}

/// Loads every `*.json` task in `dir`, sorted by file name.
pub fn load_suite(dir: &Path) -> Result<Vec<BenchmarkTask>, TaskError> {
    let io = |source| TaskError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_task(p)).collect()
}

/// Which measurements a suite run takes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Every column, using all ablations.
    #[default]
    Full,
    Ablate(Ablation),
}

/// Objective(s) to run each task under.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObjectiveChoice {
    /// The objective named in each task file.
    #[default]
    Task,
    Only(Objective),
    Both,
}

impl ObjectiveChoice {
    pub fn for_task(self, task: &BenchmarkTask) -> Vec<Objective> {
        match self {
            ObjectiveChoice::Task => vec![task.objective],
            ObjectiveChoice::Only(o) => vec![o],
            ObjectiveChoice::Both => vec![Objective::Size, Objective::Perf],
        }
    }
}

/// Builds the pipeline configuration for one objective.
pub type Configure = Arc<dyn Fn(Objective) -> PipelineConfig + Send + Sync>;

#[derive(Clone)]
pub struct SuiteConfig {
    pub objectives: ObjectiveChoice,
    pub mode: Mode,
    pub configure: Configure,
    pub jobs: usize,
    /// Timing columns report the median over this many runs.
    pub repeat: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            objectives: ObjectiveChoice::Task,
            mode: Mode::Full,
            configure: Arc::new(PipelineConfig::new),
            jobs: 1,
            repeat: 1,
        }
    }
}

impl SuiteConfig {
    pub fn pipeline_for(&self, objective: Objective) -> PipelineConfig {
        (self.configure)(objective)
    }
}

pub const CSV_HEADER: &str =
    "task,objective,e1,e2,o1,o12,o13,o123,improvement_ratio,t_pbe_ms,t_opt_ms,overhead_ratio";

/// Column indices that hold wall-clock measurements.
pub const TIMING_COLUMNS: [usize; 3] = [9, 10, 11];

/// One line of the metrics file. Objective values are ranker scores (negated costs).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsRow {
    pub task: String,
    pub objective: Option<Objective>,
    pub e1: Option<usize>,
    pub e2: Option<usize>,
    pub o1: Option<Score>,
    pub o12: Option<Score>,
    pub o13: Option<Score>,
    pub o123: Option<Score>,
    pub improvement_ratio: Option<f64>,
    pub t_pbe_ms: Option<f64>,
    pub t_opt_ms: Option<f64>,
    pub overhead_ratio: Option<f64>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn fixed(v: Option<f64>, places: usize) -> String {
    v.map(|v| format!("{v:.places$}")).unwrap_or_default()
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        [
            csv_field(&self.task),
            opt(self.objective),
            opt(self.e1),
            opt(self.e2),
            opt(self.o1),
            opt(self.o12),
            opt(self.o13),
            opt(self.o123),
            fixed(self.improvement_ratio, 4),
            fixed(self.t_pbe_ms, 3),
            fixed(self.t_opt_ms, 3),
            fixed(self.overhead_ratio, 4),
        ]
        .join(",")
    }
}

/// Ratio of baseline cost to final cost, where cost is the negated score.
pub fn improvement(baseline: Score, fin: Score) -> Option<f64> {
    let (b, f) = (-baseline.milli(), -fin.milli());
    (b > 0 && f > 0).then(|| b as f64 / f as f64)
}

#[derive(Clone, Debug)]
pub struct TaskFailure {
    pub task: String,
    pub objective: Objective,
    pub message: String,
}

/// Result of one task under one objective.
#[derive(Clone, Debug)]
pub struct TaskOutcome {
    pub row: MetricsRow,
    pub run: Option<RunResult>,
    pub failure: Option<TaskFailure>,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub outcomes: Vec<TaskOutcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub rows: usize,
    pub failed: usize,
    pub median_improvement: Option<f64>,
    pub geomean_improvement: Option<f64>,
    pub median_overhead: Option<f64>,
    pub geomean_overhead: Option<f64>,
    /// Fraction of rows with both values where e2 > e1.
    pub frac_e2_gt_e1: Option<f64>,
    pub frac_o123_gt_o13: Option<f64>,
    pub frac_o123_gt_o12: Option<f64>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| *v <= 0.0) {
        return None;
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

fn fraction<I: Iterator<Item = Option<bool>>>(items: I) -> Option<f64> {
    let known: Vec<bool> = items.flatten().collect();
    (!known.is_empty()).then(|| known.iter().filter(|b| **b).count() as f64 / known.len() as f64)
}

impl SuiteReport {
    pub fn rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.outcomes.iter().map(|o| &o.row)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TaskFailure> {
        self.outcomes.iter().filter_map(|o| o.failure.as_ref())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn aggregate(&self, objective: Option<Objective>) -> Aggregate {
        let rows: Vec<&MetricsRow> = self
            .outcomes
            .iter()
            .filter(|o| objective.is_none() || o.row.objective == objective)
            .map(|o| &o.row)
            .collect();
        let failed = self
            .failures()
            .filter(|f| objective.is_none_or(|o| o == f.objective))
            .count();
        let imp: Vec<f64> = rows.iter().filter_map(|r| r.improvement_ratio).collect();
        let ovh: Vec<f64> = rows.iter().filter_map(|r| r.overhead_ratio).collect();
        let gt = |a: Option<Score>, b: Option<Score>| a.zip(b).map(|(a, b)| a > b);
        Aggregate {
            rows: rows.len(),
            failed,
            median_improvement: median(&imp),
            geomean_improvement: geometric_mean(&imp),
            median_overhead: median(&ovh),
            geomean_overhead: geometric_mean(&ovh),
            frac_e2_gt_e1: fraction(rows.iter().map(|r| r.e2.zip(r.e1).map(|(a, b)| a > b))),
            frac_o123_gt_o13: fraction(rows.iter().map(|r| gt(r.o123, r.o13))),
            frac_o123_gt_o12: fraction(rows.iter().map(|r| gt(r.o123, r.o12))),
        }
    }

    /// Human-readable summary. Excludes timing so it is reproducible when `with_timing` is false.
    pub fn summary(&self, with_timing: bool) -> String {
        let mut out = String::new();
        let objectives: Vec<Objective> = [Objective::Size, Objective::Perf]
            .into_iter()
            .filter(|o| self.outcomes.iter().any(|x| x.row.objective == Some(*o)))
            .collect();
        let f = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
        for o in objectives {
            let a = self.aggregate(Some(o));
            let _ = writeln!(out, "objective {o}: {} rows, {} failed", a.rows, a.failed);
            let _ = writeln!(
                out,
                "  improvement median {} geomean {}",
                f(a.median_improvement),
                f(a.geomean_improvement)
            );
            if with_timing {
                let _ = writeln!(
                    out,
                    "  overhead median {} geomean {}",
                    f(a.median_overhead),
                    f(a.geomean_overhead)
                );
            }
            let _ = writeln!(
                out,
                "  e2>e1 {}  o123>o13 {}  o123>o12 {}",
                f(a.frac_e2_gt_e1),
                f(a.frac_o123_gt_o13),
                f(a.frac_o123_gt_o12)
            );
        }
        for fail in self.failures() {
            let _ = writeln!(out, "FAILED {} ({}): {}", fail.task, fail.objective, fail.message);
        }
        out
    }
}

/// Replaces timing columns with blanks so two metrics files can be compared.
pub fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            line.split(',')
                .enumerate()
                .map(|(i, f)| if TIMING_COLUMNS.contains(&i) { "" } else { f })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Intended output for each corpus input: the task's reference map, or else the output of the
/// intent-ranked program for the seed examples.
fn reference_outputs(task: &BenchmarkTask, cfg: &PipelineConfig) -> Result<BTreeMap<String, String>, PipelineError> {
    if let Some(r) = &task.reference {
        return Ok(r.clone());
    }
    let synth = cfg.synth.clone().with_top_k(1);
    let seed: Program = crate::synth::synthesize(&task.examples, &cfg.intent, &synth)?
        .into_iter()
        .next()
        .ok_or(PipelineError::NoProgram)?;
    Ok(task
        .corpus
        .iter()
        .filter_map(|i| eval(&seed, i).ok().map(|o| (i.clone(), o)))
        .collect())
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Runs one task under one objective.
pub fn run_task(task: &BenchmarkTask, objective: Objective, suite: &SuiteConfig) -> TaskOutcome {
    let cfg = suite.pipeline_for(objective);
    match measure(task, &cfg, suite) {
        Ok((row, run)) => TaskOutcome {
            row,
            run: Some(run),
            failure: None,
        },
        Err(e) => TaskOutcome {
            row: MetricsRow {
                task: task.name.clone(),
                objective: Some(objective),
                ..MetricsRow::default()
            },
            run: None,
            failure: Some(TaskFailure {
                task: task.name.clone(),
                objective,
                message: e.to_string(),
            }),
        },
    }
}

fn measure(task: &BenchmarkTask, cfg: &PipelineConfig, suite: &SuiteConfig) -> Result<(MetricsRow, RunResult), PipelineError> {
    let reference = reference_outputs(task, cfg)?;
    let lookup = |i: &str| reference.get(i).cloned();
    let conv = converge_examples(&task.corpus, lookup, &task.examples, &cfg.intent, &cfg.synth)?;
    let examples = conv.examples;

    let ablation = match suite.mode {
        Mode::Full => Ablation::None,
        Mode::Ablate(a) => a,
    };
    let repeat = suite.repeat.max(1);
    let mut runs = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        runs.push(run_ablation(&examples, &task.corpus, cfg, match ablation {
            Ablation::Skip1 => Ablation::None,
            other => other,
        })?);
    }
    let t_pbe = median(&runs.iter().map(|r| ms(r.t_pbe)).collect::<Vec<_>>()).unwrap();
    let t_opt = median(&runs.iter().map(|r| ms(r.t_opt)).collect::<Vec<_>>()).unwrap();
    let mut run = runs.swap_remove(0);

    let mut row = MetricsRow {
        task: task.name.clone(),
        objective: Some(cfg.objective),
        e1: Some(run.e1),
        o1: Some(run.o1),
        t_pbe_ms: Some(t_pbe),
        t_opt_ms: Some(t_opt),
        overhead_ratio: (t_pbe > 0.0).then(|| t_opt / t_pbe),
        ..MetricsRow::default()
    };
    if matches!(ablation, Ablation::None | Ablation::Skip1) {
        let e2 = converge_examples(&task.corpus, lookup, &task.examples, &cfg.cost, &cfg.synth)?;
        row.e2 = Some(e2.count);
        run.e2 = Some(e2.count);
    }
    match ablation {
        Ablation::None => {
            let (p13, _) = phase3_on_p1(&run, cfg)?;
            run.o13 = Some(cfg.cost.score(&p13));
            run.p13 = Some(p13);
            row.o12 = run.o12;
            row.o13 = run.o13;
            row.o123 = run.o123;
        }
        Ablation::Skip1 => {
            row.t_opt_ms = None;
            row.overhead_ratio = None;
        }
        Ablation::Skip2 => row.o13 = run.o13,
        Ablation::Skip3 => row.o12 = run.o12,
    }
    let fin = row.o123.or(row.o13).or(row.o12);
    row.improvement_ratio = fin.and_then(|f| improvement(run.o1, f));
    Ok((row, run))
}

/// Runs every task under the configured objectives. Rows come out in task order.
pub fn run_suite(tasks: &[BenchmarkTask], suite: &SuiteConfig) -> SuiteReport {
    let jobs: Vec<(&BenchmarkTask, Objective)> = tasks
        .iter()
        .flat_map(|t| suite.objectives.for_task(t).into_iter().map(move |o| (t, o)))
        .collect();
    let outcomes = if suite.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(suite.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| jobs.par_iter().map(|(t, o)| run_task(t, *o, suite)).collect())
    } else {
        jobs.iter().map(|(t, o)| run_task(t, *o, suite)).collect()
    };
    SuiteReport { outcomes }
}

/// Writes the metrics file, the summary and one emitted source per successful row into `out`.
pub fn write_outputs(report: &SuiteReport, out: &Path, metrics: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    if let Some(parent) = metrics.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(metrics, report.to_csv())?;
    std::fs::write(out.join("summary.txt"), report.summary(true))?;
    for o in &report.outcomes {
        if let (Some(run), Some(obj)) = (&o.run, o.row.objective) {
            let name = format!("{}.{}.py", sanitize(&o.row.task), obj);
            std::fs::write(out.join(name), run.source().text)?;
        }
    }
    Ok(())
}

/// File-name-safe version of a task name.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
