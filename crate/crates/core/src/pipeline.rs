//! The three-phase optimizing synthesis pipeline.
//!
//! 1. Synthesize `p1` from the user's examples with the intent ranker.
//! 2. Run `p1` on a representative sample of the corpus to get an equivalence specification,
//!    then synthesize the best programs for it under the cost ranker.
//! 3. Rewrite each Phase 2 candidate into the extended language and keep the best result.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::codegen::{translate, EmittedSource};
use crate::dsl::{eval, Program};
use crate::rank::{RankerName, Ranker, Score};
use crate::rewrite::{enumerative_synth, shipped_rules, EquivSpec, RewriteError, RewriteRule, SearchConfig, TraceStep};
use crate::sample::{representative_sample, SampleError};
use crate::synth::{synthesize, synthesize_ranked, ExampleSet, SynthConfig, SynthError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Size,
    Perf,
}

impl Objective {
    pub fn ranker_name(self) -> RankerName {
        match self {
            Objective::Size => RankerName::Size,
            Objective::Perf => RankerName::Perf,
        }
    }

    /// Number of Phase 2 candidates handed to Phase 3.
    pub fn default_top_k(self) -> usize {
        match self {
            Objective::Size => 5,
            Objective::Perf => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Size => "size",
            Objective::Perf => "perf",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "size" => Ok(Objective::Size),
            "perf" => Ok(Objective::Perf),
            other => Err(format!("unknown objective '{other}' (expected size or perf)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Ablation {
    #[default]
    None,
    /// Skip Phase 1: measure how many examples the cost ranker alone needs.
    Skip1,
    /// Skip Phase 2: rewrite `p1` directly.
    Skip2,
    /// Skip Phase 3: stop after global search.
    Skip3,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub objective: Objective,
    pub intent: Ranker,
    pub cost: Ranker,
    pub sample_n: usize,
    pub synth: SynthConfig,
    pub phase2_top_k: usize,
    pub search: SearchConfig,
    pub rules: Vec<RewriteRule>,
}

impl PipelineConfig {
    pub fn new(objective: Objective) -> Self {
        PipelineConfig {
            objective,
            intent: Ranker::intent(),
            cost: Ranker::shipped(objective.ranker_name()),
            sample_n: 20,
            synth: SynthConfig::default(),
            phase2_top_k: objective.default_top_k(),
            search: SearchConfig::default(),
            rules: shipped_rules(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no program in the search space is consistent with the examples")]
    NoProgram,
    #[error("example input {0:?} is not in the corpus")]
    ExampleNotInCorpus(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Programs and measurements of one pipeline run. Costs are ranker scores; higher is better.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub p1: Program,
    pub p12: Option<Program>,
    pub p13: Option<Program>,
    pub p123: Option<Program>,
    /// Examples consumed by Phase 1.
    pub e1: usize,
    /// Examples the cost ranker needs on its own, when measured.
    pub e2: Option<usize>,
    pub t_pbe: Duration,
    pub t_opt: Duration,
    pub o1: Score,
    pub o12: Option<Score>,
    pub o13: Option<Score>,
    pub o123: Option<Score>,
    pub equiv: EquivSpec,
    /// Sampled inputs left out of the equivalence specification because `p1` fails on them.
    pub excluded: Vec<String>,
    /// Rewrites applied to reach the final program.
    pub trace: Vec<TraceStep>,
}

impl RunResult {
    /// The most optimized program the run produced.
    pub fn final_program(&self) -> &Program {
        self.p123
            .as_ref()
            .or(self.p13.as_ref())
            .or(self.p12.as_ref())
            .unwrap_or(&self.p1)
    }

    pub fn final_score(&self) -> Score {
        self.o123.or(self.o13).or(self.o12).unwrap_or(self.o1)
    }

    pub fn source(&self) -> EmittedSource {
        translate(self.final_program())
    }

    /// Every recorded program.
    pub fn programs(&self) -> Vec<(&'static str, &Program)> {
        let mut out = vec![("p1", &self.p1)];
        for (name, p) in [("p12", &self.p12), ("p13", &self.p13), ("p123", &self.p123)] {
            if let Some(p) = p {
                out.push((name, p));
            }
        }
        out
    }
}

fn phase1(examples: &ExampleSet, cfg: &PipelineConfig) -> Result<Program, PipelineError> {
    let synth = cfg.synth.clone().with_top_k(1);
    synthesize(examples, &cfg.intent, &synth)?
        .into_iter()
        .next()
        .ok_or(PipelineError::NoProgram)
}

fn equivalence_spec<S: AsRef<str>>(
    p1: &Program,
    examples: &ExampleSet,
    corpus: &[S],
    n: usize,
) -> Result<(EquivSpec, Vec<String>), PipelineError> {
    let sample = representative_sample(corpus, n)?;
    let inputs = examples.inputs().chain(sample.iter().map(String::as_str));
    Ok(EquivSpec::from_reference(p1, inputs))
}

fn phase3(
    equiv: &EquivSpec,
    candidates: &[Program],
    cfg: &PipelineConfig,
) -> Result<(Program, Vec<TraceStep>), PipelineError> {
    let mut best: Option<(Program, Vec<TraceStep>)> = None;
    let key = |p: &Program| (cfg.cost.score(p), std::cmp::Reverse(p.size()), std::cmp::Reverse(p.to_string()));
    for c in candidates {
        let out = enumerative_synth(equiv, &cfg.cost, c, &cfg.rules, &cfg.search)?;
        if best.as_ref().is_none_or(|(b, _)| key(&out.program) > key(b)) {
            best = Some((out.program, out.trace));
        }
    }
    best.ok_or_else(|| PipelineError::Internal("no candidates for rewriting".into()))
}

/// Runs all three phases on `examples`, sampling from `corpus` for the equivalence
/// specification. Every example input must appear in the corpus.
pub fn run_qpbe<S: AsRef<str>>(
    examples: &ExampleSet,
    corpus: &[S],
    cfg: &PipelineConfig,
) -> Result<RunResult, PipelineError> {
    run_ablation(examples, corpus, cfg, Ablation::None)
}

/// Runs the pipeline with one phase left out.
///
/// `Skip1` runs the full pipeline and additionally measures `e2` by example convergence
/// against `p1`. `Skip2` records `p13` and `Skip3` records `p12` only.
pub fn run_ablation<S: AsRef<str>>(
    examples: &ExampleSet,
    corpus: &[S],
    cfg: &PipelineConfig,
    ablation: Ablation,
) -> Result<RunResult, PipelineError> {
    for input in examples.inputs() {
        if !corpus.iter().any(|c| c.as_ref() == input) {
            return Err(PipelineError::ExampleNotInCorpus(input.to_string()));
        }
    }
    let started = Instant::now();
    let p1 = phase1(examples, cfg)?;
    let t_pbe = started.elapsed();

    let opt_started = Instant::now();
    let (equiv, excluded) = equivalence_spec(&p1, examples, corpus, cfg.sample_n)?;
    let mut result = RunResult {
        o1: cfg.cost.score(&p1),
        p1,
        p12: None,
        p13: None,
        p123: None,
        e1: examples.len(),
        e2: None,
        t_pbe,
        t_opt: Duration::ZERO,
        o12: None,
        o13: None,
        o123: None,
        equiv,
        excluded,
        trace: Vec::new(),
    };

    if ablation == Ablation::Skip2 {
        let out = enumerative_synth(&result.equiv, &cfg.cost, &result.p1, &cfg.rules, &cfg.search)?;
        result.o13 = Some(cfg.cost.score(&out.program));
        result.p13 = Some(out.program);
        result.trace = out.trace;
        result.t_opt = opt_started.elapsed();
        return Ok(result);
    }

    let synth = cfg.synth.clone().with_top_k(cfg.phase2_top_k);
    let candidates: Vec<Program> = synthesize_ranked(&result.equiv.to_examples(), &cfg.cost, &synth)?
        .into_iter()
        .map(|r| r.value)
        .collect();
    let Some(p12) = candidates.first().cloned() else {
        return Err(PipelineError::Internal(format!(
            "global search found nothing although {} is consistent",
            result.p1
        )));
    };
    result.o12 = Some(cfg.cost.score(&p12));
    result.p12 = Some(p12);
    if ablation != Ablation::Skip3 {
        let (p123, trace) = phase3(&result.equiv, &candidates, cfg)?;
        result.o123 = Some(cfg.cost.score(&p123));
        result.p123 = Some(p123);
        result.trace = trace;
    }
    result.t_opt = opt_started.elapsed();

    if ablation == Ablation::Skip1 {
        let reference = result.p1.clone();
        let conv = converge_examples(corpus, |i| eval(&reference, i).ok(), examples, &cfg.cost, &cfg.synth)?;
        result.e2 = Some(conv.count);
    }
    Ok(result)
}

/// Rewrites `p1` directly under the equivalence specification of `result`.
pub fn phase3_on_p1(result: &RunResult, cfg: &PipelineConfig) -> Result<(Program, Vec<TraceStep>), PipelineError> {
    let out = enumerative_synth(&result.equiv, &cfg.cost, &result.p1, &cfg.rules, &cfg.search)?;
    Ok((out.program, out.trace))
}

/// Outcome of counterexample-guided example selection.
#[derive(Clone, Debug)]
pub struct Convergence {
    /// Number of examples used, which is also the number of synthesis rounds.
    pub count: usize,
    pub program: Program,
    pub examples: ExampleSet,
}

/// Adds corpus examples one at a time until the synthesized program agrees with `reference`
/// on every corpus input that has a reference output.
///
/// Starts from `start`, or from the first labelled input when `start` is empty; each round adds
/// the first input the current program gets wrong.
pub fn converge_examples<S, F>(
    corpus: &[S],
    reference: F,
    start: &ExampleSet,
    ranker: &Ranker,
    cfg: &SynthConfig,
) -> Result<Convergence, PipelineError>
where
    S: AsRef<str>,
    F: Fn(&str) -> Option<String>,
{
    let labelled: Vec<(&str, String)> = corpus
        .iter()
        .filter_map(|i| reference(i.as_ref()).map(|o| (i.as_ref(), o)))
        .collect();
    let mut examples = start.clone();
    if examples.is_empty() {
        let Some((first, out)) = labelled.first() else {
            return Err(PipelineError::NoProgram);
        };
        examples.push(first.to_string(), out.clone());
    }
    let synth = cfg.clone().with_top_k(1);
    loop {
        let program = synthesize(&examples, ranker, &synth)?
            .into_iter()
            .next()
            .ok_or(PipelineError::NoProgram)?;
        let wrong = labelled
            .iter()
            .find(|(i, o)| eval(&program, i).ok().as_ref() != Some(o));
        match wrong {
            None => {
                return Ok(Convergence {
                    count: examples.len(),
                    program,
                    examples,
                })
            }
            Some((i, o)) => {
                if examples.contains_input(i) {
                    return Err(PipelineError::Internal(format!("counterexample {i:?} repeats")));
                }
                examples.push(i.to_string(), o.clone());
            }
        }
    }
}

/// [`converge_examples`] against a reference program.
pub fn converge_to_program<S: AsRef<str>>(
    corpus: &[S],
    reference: &Program,
    ranker: &Ranker,
    cfg: &SynthConfig,
) -> Result<Convergence, PipelineError> {
    converge_examples(corpus, |i| eval(reference, i).ok(), &ExampleSet::default(), ranker, cfg)
}
