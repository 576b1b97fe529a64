//! Shared test helpers: a brute-force enumerator for the bounded language and random
//! generators for tasks and programs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use qpbe::dsl::{eval, resolve_pos, Atom, Pos, Program, Token, TokenPattern};
use qpbe::rank::{Ranker, Score};
use qpbe::rewrite::EquivSpec;
use qpbe::synth::{ExampleSet, SynthConfig};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SHRUNK_TOKENS: [Token; 3] = [Token::Digits, Token::Alpha, Token::Slash];

pub fn shrunk_config() -> SynthConfig {
    SynthConfig {
        max_concat_parts: 2,
        max_k_abs: 2,
        tokens: SHRUNK_TOKENS.to_vec(),
        ..SynthConfig::default()
    }
}

fn token_sequences(tokens: &[Token], max_len: usize) -> Vec<Vec<Token>> {
    let mut all = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = vec![];
        for seq in &layer {
            for t in tokens {
                let mut s: Vec<Token> = seq.clone();
                s.push(t.clone());
                next.push(s);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all.into_iter()
        .filter(|s| {
            s.iter().enumerate().all(|(i, t)| match t {
                Token::StartAnchor => i == 0,
                Token::EndAnchor => i + 1 == s.len(),
                _ => true,
            })
        })
        .collect()
}

/// Every position in the bounded language, with its resolution on each input, dropping
/// positions that fail on some input.
pub fn all_positions(inputs: &[Vec<char>], cfg: &SynthConfig) -> Vec<(Pos, Vec<usize>)> {
    let longest = inputs.iter().map(Vec::len).max().unwrap_or(0) as i64;
    let mut pos = vec![];
    for k in -(longest + 1)..=longest {
        pos.push(Pos::CPos(k));
    }
    let seqs = token_sequences(&cfg.tokens, cfg.max_pattern_len);
    let max_k = cfg.max_k_abs as i64;
    for l in &seqs {
        for r in &seqs {
            if l.is_empty() && r.is_empty() {
                continue;
            }
            for k in (-max_k..=max_k).filter(|&k| k != 0) {
                pos.push(Pos::RPos {
                    left: TokenPattern::new(l.clone()),
                    right: TokenPattern::new(r.clone()),
                    k,
                });
            }
        }
    }
    pos.into_iter()
        .filter_map(|p| {
            let resolved: Option<Vec<usize>> =
                inputs.iter().map(|i| resolve_pos(&p, i).ok()).collect();
            resolved.map(|r| (p, r))
        })
        .collect()
}

fn constants(examples: &ExampleSet, max_len: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(String::new());
    for (_, o) in examples.pairs() {
        let c: Vec<char> = o.chars().collect();
        for a in 0..c.len() {
            for b in a + 1..=c.len().min(a + max_len) {
                out.insert(c[a..b].iter().collect());
            }
        }
    }
    out
}

/// Output vector of every atom in the bounded language, as groups of atoms sharing a vector.
fn atom_groups(examples: &ExampleSet, cfg: &SynthConfig) -> HashMap<Vec<String>, Vec<Atom>> {
    let inputs: Vec<Vec<char>> = examples.inputs().map(|i| i.chars().collect()).collect();
    let positions = all_positions(&inputs, cfg);
    let mut by_vec: BTreeMap<Vec<usize>, Vec<Pos>> = BTreeMap::new();
    for (p, r) in positions {
        by_vec.entry(r).or_default().push(p);
    }
    let mut out: HashMap<Vec<String>, Vec<Atom>> = HashMap::new();
    for (ra, pa) in &by_vec {
        for (rb, pb) in &by_vec {
            let outs: Option<Vec<String>> = inputs
                .iter()
                .enumerate()
                .map(|(j, s)| (ra[j] <= rb[j]).then(|| s[ra[j]..rb[j]].iter().collect()))
                .collect();
            let Some(outs) = outs else { continue };
            let entry = out.entry(outs).or_default();
            for a in pa {
                for b in pb {
                    entry.push(Atom::SubStr(a.clone(), b.clone()));
                }
            }
        }
    }
    let m = examples.len();
    for c in constants(examples, cfg.max_const_len) {
        out.entry(vec![c.clone(); m]).or_default().push(Atom::ConstStr(c));
    }
    out
}

fn remainder(vector: &[String], outputs: &[String]) -> Option<Vec<String>> {
    vector
        .iter()
        .zip(outputs)
        .map(|(v, o)| o.strip_prefix(v.as_str()).map(str::to_string))
        .collect()
}

fn all_empty(v: &[String]) -> bool {
    v.iter().all(String::is_empty)
}

/// Every consistent program of at most two parts, excluding parts that are empty on every
/// example and single-part concatenations.
pub fn consistent_programs(examples: &ExampleSet, cfg: &SynthConfig) -> Vec<Program> {
    assert!(cfg.max_concat_parts <= 2);
    let groups = atom_groups(examples, cfg);
    let outputs: Vec<String> = examples.pairs().iter().map(|(_, o)| o.clone()).collect();
    let mut out = vec![];
    if let Some(atoms) = groups.get(&outputs) {
        out.extend(atoms.iter().cloned().map(Program::Atom));
    }
    if cfg.max_concat_parts == 2 {
        for (v1, first) in &groups {
            if all_empty(v1) {
                continue;
            }
            let Some(v2) = remainder(v1, &outputs) else { continue };
            if all_empty(&v2) {
                continue;
            }
            if let Some(second) = groups.get(&v2) {
                for a in first {
                    for b in second {
                        out.push(Program::Concat(vec![a.clone(), b.clone()]));
                    }
                }
            }
        }
    }
    for p in &out {
        assert!(examples.satisfied_by(p), "oracle produced an inconsistent program {p}");
    }
    out
}

/// Highest score over every consistent program of at most two parts.
pub fn max_score(examples: &ExampleSet, ranker: &Ranker, cfg: &SynthConfig) -> Option<Score> {
    assert!(cfg.max_concat_parts <= 2);
    let groups = atom_groups(examples, cfg);
    let best: HashMap<&Vec<String>, Score> = groups
        .iter()
        .map(|(v, atoms)| (v, atoms.iter().map(|a| ranker.score_atom(a)).max().unwrap()))
        .collect();
    let outputs: Vec<String> = examples.pairs().iter().map(|(_, o)| o.clone()).collect();
    let mut top = best.get(&outputs).copied();
    if cfg.max_concat_parts == 2 {
        let w = ranker.weights();
        for (v1, s1) in &best {
            if all_empty(v1) {
                continue;
            }
            let Some(v2) = remainder(v1, &outputs) else { continue };
            if all_empty(&v2) {
                continue;
            }
            if let Some(s2) = best.get(&v2) {
                let total = *s1 + *s2 - w.concat - w.concat_part - w.concat_part;
                top = Some(top.map_or(total, |t| t.max(total)));
            }
        }
    }
    top
}

const ALPHABET: [char; 9] = ['a', 'b', 'Z', '1', '2', '7', '/', '-', ' '];

pub fn random_input(rng: &mut StdRng, max_len: usize) -> String {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

pub fn random_pattern(rng: &mut StdRng, tokens: &[Token], max_len: usize) -> TokenPattern {
    let n = rng.gen_range(0..=max_len);
    let mut seq: Vec<Token> = vec![];
    while seq.len() < n {
        let t = tokens.choose(rng).unwrap().clone();
        let ok = match t {
            Token::StartAnchor => seq.is_empty(),
            Token::EndAnchor => seq.len() + 1 == n,
            _ => true,
        };
        if ok {
            seq.push(t);
        }
    }
    TokenPattern::new(seq)
}

pub fn random_pos(rng: &mut StdRng, cfg: &SynthConfig, max_input: usize) -> Pos {
    let m = max_input as i64;
    if rng.gen_bool(0.4) {
        Pos::CPos(rng.gen_range(-(m + 1)..=m))
    } else {
        loop {
            let left = random_pattern(rng, &cfg.tokens, cfg.max_pattern_len);
            let right = random_pattern(rng, &cfg.tokens, cfg.max_pattern_len);
            if left.is_empty() && right.is_empty() {
                continue;
            }
            let k = cfg.max_k_abs as i64;
            let mut kk = rng.gen_range(1..=k);
            if rng.gen_bool(0.5) {
                kk = -kk;
            }
            return Pos::RPos { left, right, k: kk };
        }
    }
}

pub fn random_atom(rng: &mut StdRng, cfg: &SynthConfig, max_input: usize) -> Atom {
    if rng.gen_bool(0.2) {
        let n = rng.gen_range(1..=3);
        Atom::ConstStr((0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect())
    } else {
        Atom::SubStr(random_pos(rng, cfg, max_input), random_pos(rng, cfg, max_input))
    }
}

pub fn random_program(rng: &mut StdRng, cfg: &SynthConfig, max_input: usize) -> Program {
    let n = rng.gen_range(1..=cfg.max_concat_parts);
    Program::from_parts((0..n).map(|_| random_atom(rng, cfg, max_input)).collect())
}

/// A random task with 1 to 3 examples that some program in the bounded language solves.
pub fn random_task(rng: &mut StdRng, cfg: &SynthConfig, max_input: usize) -> ExampleSet {
    loop {
        let m = rng.gen_range(1..=3);
        let mut inputs: Vec<String> = (0..m).map(|_| random_input(rng, max_input)).collect();
        inputs.sort();
        inputs.dedup();
        let p = random_program(rng, cfg, max_input);
        let outs: Option<Vec<String>> = inputs.iter().map(|i| eval(&p, i).ok()).collect();
        if let Some(outs) = outs {
            return ExampleSet::new(inputs.into_iter().zip(outs));
        }
    }
}

/// A random program, sometimes padded with constant parts, and a spec of inputs it accepts.
pub fn random_spec_case(rng: &mut StdRng, cfg: &SynthConfig) -> (Program, EquivSpec) {
    loop {
        let mut parts = random_program(rng, cfg, 6).parts().to_vec();
        while parts.len() < 4 && rng.gen_bool(0.4) {
            let at = rng.gen_range(0..=parts.len());
            parts.insert(at, Atom::ConstStr(random_input(rng, 2)));
        }
        let p = Program::from_parts(parts);
        let mut inputs = vec![];
        for _ in 0..200 {
            let x = random_input(rng, 8);
            if eval(&p, &x).is_ok() && !inputs.contains(&x) {
                inputs.push(x);
                if inputs.len() == 3 {
                    break;
                }
            }
        }
        if !inputs.is_empty() {
            let spec = EquivSpec::from_reference(&p, inputs.iter().map(String::as_str)).0;
            return (p, spec);
        }
    }
}
