//! Runs emitted Python against the interpreter. Skipped when `python3` is not on PATH.

mod common;

use std::io::Write;
use std::process::{Command, Stdio};

use common::random_program;
use qpbe::codegen::translate;
use qpbe::dsl::{eval, parse, Atom, Pos, Program, Side, Token, TokenPattern};
use qpbe::synth::SynthConfig;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const CHARS: [char; 16] = ['a', 'B', 'z', '0', '7', ' ', '\t', '/', '-', ',', '.', ':', '=', 'é', '"', '\\'];
const NEEDLES: [&str; 6] = ["/", "-", ":", "a", "0 ", "=="];

fn python_available() -> bool {
    Command::new("python3").arg("--version").output().is_ok_and(|o| o.status.success())
}

fn random_text(rng: &mut StdRng, max: usize) -> String {
    let n = rng.gen_range(0..=max).max(rng.gen_range(0..=max));
    (0..n).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

fn with_literals(rng: &mut StdRng, p: &TokenPattern) -> TokenPattern {
    let toks = p
        .tokens()
        .iter()
        .map(|t| match t {
            Token::StartAnchor | Token::EndAnchor => t.clone(),
            _ if rng.gen_bool(0.25) => Token::Literal(NEEDLES.choose(rng).unwrap().to_string()),
            _ => t.clone(),
        })
        .collect();
    TokenPattern::new(toks)
}

/// Swaps some positions for `FindPos` and some tokens for literals.
fn extend(rng: &mut StdRng, p: &Program) -> Program {
    let pos = |rng: &mut StdRng, x: &Pos| -> Pos {
        match x {
            _ if rng.gen_bool(0.3) => Pos::FindPos {
                needle: NEEDLES.choose(rng).unwrap().to_string(),
                k: *[-2, -1, 1, 2].choose(rng).unwrap(),
                side: if rng.gen_bool(0.5) { Side::After } else { Side::Before },
            },
            Pos::RPos { left, right, k } => Pos::RPos {
                left: with_literals(rng, left),
                right: with_literals(rng, right),
                k: *k,
            },
            other => other.clone(),
        }
    };
    let parts = p
        .parts()
        .iter()
        .map(|a| match a {
            Atom::SubStr(x, y) => {
                let x = pos(rng, x);
                let y = pos(rng, y);
                Atom::SubStr(x, y)
            }
            c => c.clone(),
        })
        .collect();
    Program::from_parts(parts)
}

#[test]
fn emitted_python_agrees_with_interpreter() {
    if !python_available() {
        eprintln!("python3 not found; skipping");
        return;
    }
    let mut rng = StdRng::seed_from_u64(99);
    let cfg = SynthConfig::default();
    let mut programs: Vec<Program> = vec![
        parse("(substr (cpos 15) (cpos 25))").unwrap(),
        parse("(substr (rpos (ws) (digits) -1) (rpos (digits) (end) 1))").unwrap(),
        parse(r#"(concat (conststr "x\"y") (substr (findpos ":" 1 after) (cpos -1)))"#).unwrap(),
    ];
    let mut cases: Vec<Vec<String>> = vec![vec!["06/08/2010 and 08/05/2010".to_string(), "a:b".to_string()]; 3];
    while programs.len() < 300 {
        let base = random_program(&mut rng, &cfg, 8);
        let p = if rng.gen_bool(0.5) { extend(&mut rng, &base) } else { base };
        if p.validate().is_err() {
            continue;
        }
        // Up to 6 inputs the program accepts and 2 it rejects.
        let (mut ok, mut bad) = (vec![], vec![]);
        for _ in 0..300 {
            let x = random_text(&mut rng, 14);
            match eval(&p, &x) {
                Ok(_) if ok.len() < 6 => ok.push(x),
                Err(_) if bad.len() < 2 => bad.push(x),
                _ => {}
            }
        }
        if !ok.is_empty() {
            ok.extend(bad);
            programs.push(p);
            cases.push(ok);
        }
    }

    let finds = programs.iter().filter(|p| p.to_string().contains("findpos")).count();
    let literals = programs.iter().filter(|p| !p.is_core() && !p.to_string().contains("findpos")).count();
    assert!(finds >= 20 && literals >= 5, "findpos {finds}, literal-only {literals}");

    let payload = serde_json::json!(programs
        .iter()
        .zip(&cases)
        .map(|(p, xs)| serde_json::json!({"source": translate(p).text, "inputs": xs}))
        .collect::<Vec<_>>());
    let script = r#"
import json, sys
out = []
for case in json.load(sys.stdin):
    ns = {}
    exec(compile(case["source"], "<emitted>", "exec"), ns)
    out.append([ns["transform"](x) for x in case["inputs"]])
json.dump(out, sys.stdout)
"#;
    let mut child = Command::new("python3")
        .args(["-c", script])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(payload.to_string().as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    let got: Vec<Vec<Option<String>>> = serde_json::from_slice(&output.stdout).unwrap();

    let mut mismatches = vec![];
    for ((p, xs), row) in programs.iter().zip(&cases).zip(&got) {
        for (x, py) in xs.iter().zip(row) {
            let want = eval(p, x).ok();
            if &want != py {
                mismatches.push(format!("{p} on {x:?}: interpreter {want:?}, python {py:?}"));
            }
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches.join("\n"));
}
