//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain text and returns a JSON string. Failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use qpbe::dsl::{eval, Program};
use qpbe::pipeline::{phase3_on_p1, run_qpbe, Objective, PipelineConfig};
use qpbe::sample::{profile, representative_sample};
use qpbe::synth::ExampleSet;

fn lines(text: &str) -> Vec<String> {
    text.lines().map(|l| l.trim_end_matches('\r').to_string()).filter(|l| !l.is_empty()).collect()
}

/// Parses `input => output` lines.
fn parse_examples(text: &str) -> Result<ExampleSet, String> {
    let mut pairs = vec![];
    for (n, line) in lines(text).iter().enumerate() {
        let (i, o) = line
            .split_once(" => ")
            .ok_or_else(|| format!("example line {}: expected `input => output`", n + 1))?;
        pairs.push((i.to_string(), o.to_string()));
    }
    if pairs.is_empty() {
        return Err("no examples".into());
    }
    Ok(ExampleSet::new(pairs))
}

fn error(e: impl ToString) -> Value {
    json!({ "error": e.to_string() })
}

/// Runs the full pipeline. Example inputs are added to the corpus when missing.
pub fn synthesize_value(examples: &str, corpus: &str, objective: &str) -> Value {
    let examples = match parse_examples(examples) {
        Ok(e) => e,
        Err(e) => return error(e),
    };
    let objective: Objective = match objective.parse() {
        Ok(o) => o,
        Err(e) => return error(e),
    };
    let mut inputs = lines(corpus);
    for i in examples.inputs() {
        if !inputs.iter().any(|c| c == i) {
            inputs.push(i.to_string());
        }
    }
    let cfg = PipelineConfig::new(objective);
    let mut run = match run_qpbe(&examples, &inputs, &cfg) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    if let Ok((p13, _)) = phase3_on_p1(&run, &cfg) {
        run.o13 = Some(cfg.cost.score(&p13));
        run.p13 = Some(p13);
    }
    let fin = run.final_program().clone();
    let programs: Vec<Value> = run
        .programs()
        .into_iter()
        .map(|(name, p)| json!({ "name": name, "program": p.to_string(), "score": cfg.cost.score(p).to_string() }))
        .collect();
    let outputs: Vec<Value> = inputs
        .iter()
        .map(|i| json!({ "input": i, "output": eval(&fin, i).ok() }))
        .collect();
    json!({
        "objective": objective.as_str(),
        "programs": programs,
        "final": fin.to_string(),
        "python": run.source().text,
        "trace": run.trace,
        "outputs": outputs,
    })
}

/// Runs a serialized program on each line of `inputs`.
pub fn run_program_value(program: &str, inputs: &str) -> Value {
    let p: Program = match program.parse() {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let rows: Vec<Value> = lines(inputs)
        .iter()
        .map(|i| match eval(&p, i) {
            Ok(o) => json!({ "input": i, "output": o }),
            Err(e) => json!({ "input": i, "output": null, "error": e.to_string() }),
        })
        .collect();
    json!({ "program": p.to_string(), "size": p.size(), "rows": rows })
}

/// Picks `n` representative lines of `corpus` and reports each line's profile.
pub fn sample_value(corpus: &str, n: usize) -> Value {
    let inputs = lines(corpus);
    match representative_sample(&inputs, n) {
        Ok(sample) => {
            let rows: Vec<Value> = sample
                .iter()
                .map(|s| json!({ "input": s, "profile": profile(s).to_string() }))
                .collect();
            json!({ "corpus": inputs.len(), "sample": rows })
        }
        Err(e) => error(e),
    }
}

#[wasm_bindgen]
pub fn synthesize(examples: &str, corpus: &str, objective: &str) -> String {
    synthesize_value(examples, corpus, objective).to_string()
}

#[wasm_bindgen]
pub fn run_program(program: &str, inputs: &str) -> String {
    run_program_value(program, inputs).to_string()
}

#[wasm_bindgen]
pub fn sample(corpus: &str, n: usize) -> String {
    sample_value(corpus, n).to_string()
}
