//! Release gate. Prints one PASS/FAIL line per criterion and fails if any criterion fails.

mod common;

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{max_score, random_input, random_spec_case, random_task, shrunk_config};
use qpbe::bench::{load_suite, run_suite, strip_timing, BenchmarkTask, ObjectiveChoice, SuiteConfig, SuiteReport};
use qpbe::dsl::Pos;
use qpbe::pipeline::{phase3_on_p1, run_qpbe, Objective, PipelineConfig, RunResult};
use qpbe::rank::Ranker;
use qpbe::rewrite::{greedy, rule_by_id, shipped_rules, R1, R4};
use qpbe::synth::{synthesize, SynthConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

const SOUNDNESS_RANDOM_TASKS: usize = 200;
const SOUNDNESS_LIMIT: Duration = Duration::from_secs(120);
const OPTIMALITY_INSTANCES: usize = 200;
const OPTIMALITY_LIMIT: Duration = Duration::from_secs(300);
const DATE_SLICE_LIMIT: Duration = Duration::from_secs(5);
const REWRITE_PROGRAMS: usize = 500;
const MIN_FIXTURES_PER_DIRECTION: usize = 3;

const E2_GT_E1: [&str; 4] = ["word-space-number", "item-hash-number", "code-after-dash", "email-domain"];
const O123_GT_O12: [&str; 4] = ["kv-colon-value", "kv-slash-value", "kv-comma-second", "version-major"];
const O123_GT_O13: [&str; 3] = ["swap-dash", "swap-slash", "swap-dot"];

/// Written straight to the stderr handle so the lines show without `--nocapture`.
fn report(ok: bool, name: &str, detail: String) -> bool {
    let line = format!("{} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    ok
}

fn tasks() -> Vec<BenchmarkTask> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tasks");
    load_suite(&dir).expect("bundled tasks load")
}

fn both(tasks: &[BenchmarkTask]) -> SuiteReport {
    let cfg = SuiteConfig {
        objectives: ObjectiveChoice::Both,
        ..SuiteConfig::default()
    };
    run_suite(tasks, &cfg)
}

fn all_sound(run: &RunResult) -> bool {
    run.programs().iter().all(|(_, p)| run.equiv.satisfied_by(p))
}

fn soundness(tasks: &[BenchmarkTask]) -> bool {
    let started = Instant::now();
    let suite = both(tasks);
    let mut bad: Vec<String> = suite.failures().map(|f| format!("{} failed: {}", f.task, f.message)).collect();
    let mut checked = 0;
    for o in &suite.outcomes {
        if let Some(run) = &o.run {
            checked += 1;
            if !all_sound(run) {
                bad.push(o.row.task.clone());
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(2024);
    let synth = SynthConfig::default();
    for i in 0..SOUNDNESS_RANDOM_TASKS {
        let examples = random_task(&mut rng, &synth, 8);
        let mut corpus: Vec<String> = examples.inputs().map(str::to_string).collect();
        corpus.extend((0..12).map(|_| random_input(&mut rng, 8)));
        let objective = if i % 2 == 0 { Objective::Size } else { Objective::Perf };
        let cfg = PipelineConfig::new(objective);
        match run_qpbe(&examples, &corpus, &cfg) {
            Ok(mut run) => {
                let (p13, _) = phase3_on_p1(&run, &cfg).unwrap();
                run.p13 = Some(p13);
                checked += 1;
                if !all_sound(&run) {
                    bad.push(format!("random task {i}"));
                }
            }
            Err(e) => bad.push(format!("random task {i}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    report(
        bad.is_empty() && elapsed < SOUNDNESS_LIMIT,
        "soundness",
        format!("{checked} runs, {} unsound or failed, {elapsed:.2?} {bad:?}", bad.len()),
    )
}

fn optimality() -> bool {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(4048);
    let cfg = shrunk_config();
    let rankers = [Ranker::intent(), Ranker::size(), Ranker::perf()];
    let mut mismatches = 0;
    for i in 0..OPTIMALITY_INSTANCES {
        let e = random_task(&mut rng, &cfg, 6);
        let r = &rankers[i % 3];
        let got = synthesize(&e, r, &cfg).unwrap().first().map(|p| r.score(p));
        if got != max_score(&e, r, &cfg) {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    report(
        mismatches == 0 && elapsed < OPTIMALITY_LIMIT,
        "optimality",
        format!("{OPTIMALITY_INSTANCES} instances, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn monotone(suite: &SuiteReport) -> bool {
    let mut bad = vec![];
    for o in &suite.outcomes {
        let r = &o.row;
        let ok = match (r.o1, r.o12, r.o123) {
            (Some(o1), Some(o12), Some(o123)) => o123 >= o12 && o12 >= o1,
            _ => false,
        };
        if !ok {
            bad.push(format!("{}/{}", r.task, r.objective.map(|o| o.as_str()).unwrap_or("?")));
        }
    }
    report(
        bad.is_empty(),
        "monotone improvement",
        format!("{} rows, violations {bad:?}", suite.outcomes.len()),
    )
}

fn date_slice(tasks: &[BenchmarkTask]) -> bool {
    let started = Instant::now();
    let task = tasks.iter().find(|t| t.name == "second-of-two-dates").expect("fixture");
    let cfg = SuiteConfig {
        objectives: ObjectiveChoice::Only(Objective::Perf),
        ..SuiteConfig::default()
    };
    let suite = run_suite(std::slice::from_ref(task), &cfg);
    let Some(run) = &suite.outcomes[0].run else {
        return report(false, "date slice example", "run failed".into());
    };
    let fin = run.final_program();
    let slice = matches!(
        fin.parts(),
        [qpbe::dsl::Atom::SubStr(Pos::CPos(15), Pos::CPos(25))]
    );
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/second-of-two-dates.perf.py");
    let golden = std::fs::read_to_string(golden_path).unwrap();
    let same = run.source().text == golden;
    let elapsed = started.elapsed();
    report(
        task.corpus.len() == 10 && slice && same && elapsed < DATE_SLICE_LIMIT,
        "date slice example",
        format!("final {fin}, golden match {same}, corpus {}, {elapsed:.2?}", task.corpus.len()),
    )
}

fn termination_and_confluence() -> bool {
    let mut rng = StdRng::seed_from_u64(77);
    let cfg = SynthConfig::default();
    let rules = shipped_rules();
    let rankers = [Ranker::intent(), Ranker::size(), Ranker::perf()];
    let r1 = rule_by_id(R1).unwrap();
    let r4 = rule_by_id(R4).unwrap();
    let orders = [vec![r1, r4], vec![r4, r1]];
    let (mut over, mut diverged, mut steps) = (0, 0, 0);
    for i in 0..REWRITE_PROGRAMS {
        let (p, spec) = random_spec_case(&mut rng, &cfg);
        let r = &rankers[i % 3];
        let (_, trace) = greedy(&spec, r, &p, &rules);
        steps += trace.len();
        if trace.len() > p.size() * rules.len() {
            over += 1;
        }
        let forms: Vec<_> = orders.iter().map(|o| r.score(&greedy(&spec, r, &p, o).0)).collect();
        if forms[0] != forms[1] {
            diverged += 1;
        }
    }
    report(
        over == 0 && diverged == 0,
        "rewrite termination and confluence",
        format!("{REWRITE_PROGRAMS} programs, {steps} greedy steps, {over} over bound, {diverged} order-dependent"),
    )
}

fn ablation(suite: &SuiteReport) -> bool {
    let row = |name: &str| {
        suite
            .outcomes
            .iter()
            .find(|o| o.row.task == name && o.row.objective == Some(Objective::Perf))
            .map(|o| o.row.clone())
    };
    let count = |names: &[&str], f: &dyn Fn(&qpbe::bench::MetricsRow) -> bool| {
        names.iter().filter(|n| row(n).is_some_and(|r| f(&r))).count()
    };
    let e = count(&E2_GT_E1, &|r| r.e2 > r.e1);
    let o12 = count(&O123_GT_O12, &|r| r.o123 > r.o12);
    let o13 = count(&O123_GT_O13, &|r| r.o123 > r.o13);
    let agg = suite.aggregate(None);
    let f = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
    let min = MIN_FIXTURES_PER_DIRECTION;
    report(
        e >= min && o12 >= min && o13 >= min,
        "ablation direction",
        format!(
            "fixtures e2>e1 {e}, o123>o12 {o12}, o123>o13 {o13}; suite fractions {} {} {}",
            f(agg.frac_e2_gt_e1),
            f(agg.frac_o123_gt_o12),
            f(agg.frac_o123_gt_o13)
        ),
    )
}

fn determinism(tasks: &[BenchmarkTask], first: &SuiteReport) -> bool {
    let parallel = SuiteConfig {
        objectives: ObjectiveChoice::Both,
        jobs: 4,
        ..SuiteConfig::default()
    };
    let a = strip_timing(&first.to_csv());
    let b = strip_timing(&both(tasks).to_csv());
    let c = strip_timing(&run_suite(tasks, &parallel).to_csv());
    report(
        a == b && a == c,
        "determinism",
        format!("{} csv lines, sequential rerun equal {}, parallel equal {}", a.lines().count(), a == b, a == c),
    )
}

#[test]
fn acceptance() {
    let _ = std::io::stderr().write_all(b"\nacceptance criteria\n");
    let tasks = tasks();
    assert!(tasks.len() >= 25, "{} bundled tasks", tasks.len());
    let suite = both(&tasks);
    let results = [
        soundness(&tasks),
        optimality(),
        monotone(&suite),
        date_slice(&tasks),
        termination_and_confluence(),
        ablation(&suite),
        determinism(&tasks, &suite),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
