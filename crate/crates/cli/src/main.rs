use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qpbe::bench::{
    load_suite, load_task, run_suite, sanitize, write_outputs, BenchmarkTask, Mode, ObjectiveChoice, SuiteConfig,
    SuiteReport, TaskError, CSV_HEADER,
};
use qpbe::dsl::{eval, Program};
use qpbe::pipeline::{Ablation, Objective, PipelineConfig};
use qpbe::rank::{Ranker, RankerName};

#[derive(Parser)]
#[command(name = "qpbe", version, about = "Synthesize and optimize string transformations from examples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one task and emit the optimized program as Python.
    Synth {
        task: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Directory for the emitted source. Printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a one-row metrics file here.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run every task in a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[command(flatten)]
        suite: SuiteOpts,
    },
    /// Run a suite with one phase left out.
    Ablate {
        dir: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        skip: u8,
        #[command(flatten)]
        opts: Opts,
        #[command(flatten)]
        suite: SuiteOpts,
    },
    /// Print every intermediate program and the applied rewrites.
    Explain {
        task: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run a serialized program on each line of stdin.
    Eval {
        program: String,
        /// Printed in place of the output when the program fails on a line.
        #[arg(long, default_value = "")]
        null: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Size,
    Perf,
    Both,
}

#[derive(Args, Clone)]
struct Opts {
    /// Overrides the objective named in each task file.
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Corpus inputs sampled into the equivalence specification.
    #[arg(long, default_value_t = 20)]
    sample_size: usize,
    /// Candidates handed from global search to rewriting.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    max_parts: Option<usize>,
    #[arg(long)]
    max_const_len: Option<usize>,
    /// Largest |k| for occurrence indices.
    #[arg(long)]
    max_k: Option<usize>,
    /// Node expansions in the rewrite search.
    #[arg(long, default_value_t = 500)]
    budget: usize,
    /// Recorded in the summary. Runs are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weights file replacing the shipped ranker it names. May be repeated.
    #[arg(long)]
    weights: Vec<PathBuf>,
    /// Per-synthesis-call time limit.
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Args, Clone)]
struct SuiteOpts {
    #[arg(long, default_value = "qpbe-out")]
    out: PathBuf,
    /// Metrics CSV path. Defaults to metrics.csv inside --out.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report timing medians over this many runs.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

enum Failure {
    Usage(String),
    Synthesis(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Synthesis(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Synthesis(m) | Failure::Io(m) => m,
        }
    }
}

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        Failure::Io(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

impl Opts {
    fn objectives(&self) -> ObjectiveChoice {
        match self.objective {
            None => ObjectiveChoice::Task,
            Some(ObjectiveArg::Size) => ObjectiveChoice::Only(Objective::Size),
            Some(ObjectiveArg::Perf) => ObjectiveChoice::Only(Objective::Perf),
            Some(ObjectiveArg::Both) => ObjectiveChoice::Both,
        }
    }

    fn configure(&self) -> Result<qpbe::bench::Configure, Failure> {
        let mut rankers = Vec::new();
        for path in &self.weights {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let r = Ranker::parse_weights(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            rankers.push(r);
        }
        if self.sample_size == 0 {
            return Err(Failure::Usage("--sample-size must be positive".into()));
        }
        if self.top_k == Some(0) {
            return Err(Failure::Usage("--top-k must be positive".into()));
        }
        let opts = self.clone();
        let probe = build(&opts, &rankers, Objective::Size);
        probe.synth.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(Arc::new(move |objective| build(&opts, &rankers, objective)))
    }
}

fn build(opts: &Opts, rankers: &[Ranker], objective: Objective) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(objective);
    cfg.sample_n = opts.sample_size;
    if let Some(k) = opts.top_k {
        cfg.phase2_top_k = k;
    }
    if let Some(v) = opts.max_parts {
        cfg.synth.max_concat_parts = v;
    }
    if let Some(v) = opts.max_const_len {
        cfg.synth.max_const_len = v;
    }
    if let Some(v) = opts.max_k {
        cfg.synth.max_k_abs = v;
    }
    cfg.synth.deadline = opts.timeout_ms.map(Duration::from_millis);
    cfg.search.budget = opts.budget;
    for r in rankers {
        if r.name() == RankerName::Intent {
            cfg.intent = r.clone();
        } else if r.name() == objective.ranker_name() {
            cfg.cost = r.clone();
        }
    }
    cfg
}

fn suite_config(opts: &Opts, suite: &SuiteOpts, mode: Mode) -> Result<SuiteConfig, Failure> {
    if suite.jobs == 0 || suite.repeat == 0 {
        return Err(Failure::Usage("--jobs and --repeat must be positive".into()));
    }
    Ok(SuiteConfig {
        objectives: opts.objectives(),
        mode,
        configure: opts.configure()?,
        jobs: suite.jobs,
        repeat: suite.repeat,
    })
}

fn run_dir(dir: &Path, opts: &Opts, suite: &SuiteOpts, mode: Mode) -> Result<(), Failure> {
    let cfg = suite_config(opts, suite, mode)?;
    let tasks = load_suite(dir)?;
    let report = run_suite(&tasks, &cfg);
    let metrics = suite.metrics.clone().unwrap_or_else(|| suite.out.join("metrics.csv"));
    write_outputs(&report, &suite.out, &metrics).map_err(io_err(&suite.out))?;
    print!("{}", report.summary(true));
    println!("seed {}", opts.seed);
    println!("metrics written to {}", metrics.display());
    Ok(())
}

fn run_one(task: &BenchmarkTask, opts: &Opts) -> Result<SuiteReport, Failure> {
    let cfg = SuiteConfig {
        objectives: opts.objectives(),
        configure: opts.configure()?,
        ..SuiteConfig::default()
    };
    let report = run_suite(std::slice::from_ref(task), &cfg);
    if let Some(f) = report.failures().next() {
        return Err(Failure::Synthesis(format!("{} ({}): {}", f.task, f.objective, f.message)));
    }
    Ok(report)
}

fn synth(path: &Path, opts: &Opts, out: Option<&Path>, metrics: Option<&Path>) -> Result<(), Failure> {
    let task = load_task(path)?;
    let report = run_one(&task, opts)?;
    if let Some(m) = metrics {
        std::fs::write(m, report.to_csv()).map_err(io_err(m))?;
    }
    for o in &report.outcomes {
        let (Some(run), Some(obj)) = (&o.run, o.row.objective) else { continue };
        let source = run.source();
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
                let file = dir.join(format!("{}.{obj}.py", sanitize(&task.name)));
                std::fs::write(&file, &source.text).map_err(io_err(&file))?;
                println!("{obj}: {} -> {}", run.final_program(), file.display());
            }
            None => {
                eprintln!("{obj}: {}", run.final_program());
                print!("{}", source.text);
            }
        }
    }
    Ok(())
}

fn explain(path: &Path, opts: &Opts) -> Result<(), Failure> {
    let task = load_task(path)?;
    let report = run_one(&task, opts)?;
    for o in &report.outcomes {
        let (Some(run), Some(obj)) = (&o.run, o.row.objective) else { continue };
        println!("task {} objective {obj}", task.name);
        println!("examples {}  equivalence inputs {}  excluded {}", run.e1, run.equiv.len(), run.excluded.len());
        let scores = [Some(run.o1), run.o12, run.o13, run.o123];
        for ((name, p), s) in run.programs().into_iter().zip(scores.into_iter().flatten()) {
            println!("{name:<5} {:>10}  {p}", s.to_string());
        }
        println!("{CSV_HEADER}");
        println!("{}", o.row.to_csv());
        if run.trace.is_empty() {
            println!("no rewrites applied");
        }
        for (i, s) in run.trace.iter().enumerate() {
            println!("{}. {} at {}", i + 1, s.rule, s.path);
            println!("   before {}", s.before);
            println!("   after  {}", s.after);
        }
    }
    Ok(())
}

fn eval_lines(program: &str, null: &str) -> Result<(), Failure> {
    let p: Program = program.parse().map_err(|e| Failure::Usage(format!("program: {e}")))?;
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        let out = eval(&p, &line).unwrap_or_else(|e| {
            eprintln!("{line:?}: {e}");
            null.to_string()
        });
        writeln!(stdout, "{out}").map_err(|e| Failure::Io(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Synth { task, opts, out, metrics } => synth(&task, &opts, out.as_deref(), metrics.as_deref()),
        Cmd::Bench { dir, opts, suite } => run_dir(&dir, &opts, &suite, Mode::Full),
        Cmd::Ablate { dir, skip, opts, suite } => {
            let a = match skip {
                1 => Ablation::Skip1,
                2 => Ablation::Skip2,
                _ => Ablation::Skip3,
            };
            run_dir(&dir, &opts, &suite, Mode::Ablate(a))
        }
        Cmd::Explain { task, opts } => explain(&task, &opts),
        Cmd::Eval { program, null } => eval_lines(&program, &null),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qpbe: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
