//! Top-down deductive synthesis over the core language.
//!
//! The search state is the vector of output offsets already produced, one per example. From a
//! state, every atom consistent with all examples moves to a new state; programs are paths from
//! the all-zero state to the vector of output lengths. Atoms are found through the witness
//! functions in [`witness`], driven by the first example and checked against the rest.
//!
//! Results are exact top-k lists under the order (score descending, size ascending, serialized
//! text ascending). That order is compositional: scores and sizes are sums over nodes and
//! serialized subterms are prefix-free, so k-best lists of subterms combine into k-best lists
//! of their parents.

pub mod witness;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::dsl::{eval, Atom, Pos, Program, Token, TokenPattern};
use crate::rank::{Ranker, Score};

use witness::{cpos_at, enumerate_patterns, rpos, rpos_at, spans, PatternTable};

/// Ordered input-output pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSet {
    pairs: Vec<(String, String)>,
}

impl ExampleSet {
    /// Builds a set, dropping exact duplicate pairs. Conflicting outputs for one input are kept
    /// and make every synthesis result empty.
    pub fn new<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut set = ExampleSet::default();
        for (i, o) in pairs {
            set.push(i.into(), o.into());
        }
        set
    }

    pub fn push(&mut self, input: String, output: String) {
        if !self.pairs.iter().any(|(i, o)| *i == input && *o == output) {
            self.pairs.push((input, output));
        }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(i, _)| i.as_str())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains_input(&self, input: &str) -> bool {
        self.pairs.iter().any(|(i, _)| i == input)
    }

    /// True if `p` produces every listed output.
    pub fn satisfied_by(&self, p: &Program) -> bool {
        self.pairs
            .iter()
            .all(|(i, o)| eval(p, i).is_ok_and(|got| got == *o))
    }
}

/// Search bounds. Together they make the searched language finite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    pub max_concat_parts: usize,
    pub max_const_len: usize,
    pub max_k_abs: usize,
    pub top_k: usize,
    pub deadline: Option<Duration>,
    /// Token vocabulary for regex positions. Literal tokens are ignored.
    pub tokens: Vec<Token>,
    pub max_pattern_len: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_concat_parts: 4,
            max_const_len: 12,
            max_k_abs: 3,
            top_k: 1,
            deadline: None,
            tokens: Token::CLASSES.to_vec(),
            max_pattern_len: 2,
        }
    }
}

impl SynthConfig {
    pub fn with_top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what: &str| Err(SynthError::InvalidConfig(format!("{what} must be at least 1")));
        if self.max_concat_parts == 0 {
            return bad("max_concat_parts");
        }
        if self.max_const_len == 0 {
            return bad("max_const_len");
        }
        if self.max_k_abs == 0 {
            return bad("max_k_abs");
        }
        if self.top_k == 0 {
            return bad("top_k");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("no examples given")]
    EmptyExamples,
    #[error("synthesis deadline of {0:?} exceeded")]
    Deadline(Duration),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// A value with its rank key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranked<T> {
    pub score: Score,
    pub size: usize,
    pub text: String,
    pub value: T,
}

impl<T: Eq> Ranked<T> {
    /// Orders best first.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then(self.size.cmp(&other.size))
            .then_with(|| self.text.cmp(&other.text))
    }
}

fn keep_best<T: Eq>(v: &mut Vec<Ranked<T>>, k: usize) {
    v.sort_by(Ranked::cmp_key);
    v.dedup_by(|a, b| a.text == b.text);
    v.truncate(k);
}

/// Returns up to `cfg.top_k` programs consistent with every example, best first.
///
/// An empty list means no program within the bounds is consistent.
pub fn synthesize(
    examples: &ExampleSet,
    ranker: &Ranker,
    cfg: &SynthConfig,
) -> Result<Vec<Program>, SynthError> {
    Ok(synthesize_ranked(examples, ranker, cfg)?
        .into_iter()
        .map(|r| r.value)
        .collect())
}

/// Like [`synthesize`], keeping each program's score, size and serialized text.
pub fn synthesize_ranked(
    examples: &ExampleSet,
    ranker: &Ranker,
    cfg: &SynthConfig,
) -> Result<Vec<Ranked<Program>>, SynthError> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(SynthError::EmptyExamples);
    }
    let mut search = Search::new(examples, ranker, cfg);
    search.run()
}

type State = Vec<usize>;

/// Successor states of one state, each with the atoms that reach it.
type Transitions = Rc<Vec<(State, Vec<Ranked<Atom>>)>>;

struct Example {
    input: Vec<char>,
    output: Vec<char>,
}

/// Positions of the first input grouped by where they resolve on every input.
struct PosGroup {
    resolved: Vec<usize>,
    best: Vec<Ranked<Pos>>,
}

#[derive(Clone)]
struct Seq {
    score: Score,
    size: usize,
    /// Serialized parts joined by spaces, closed by `)`.
    text: String,
    atoms: Vec<Atom>,
}

struct Search<'a> {
    ex: Vec<Example>,
    ranker: &'a Ranker,
    cfg: &'a SynthConfig,
    started: Instant,
    groups: Vec<Vec<PosGroup>>,
    transitions: HashMap<State, Transitions>,
    memo: HashMap<(State, usize), Rc<Vec<Seq>>>,
    final_state: State,
}

impl<'a> Search<'a> {
    fn new(examples: &ExampleSet, ranker: &'a Ranker, cfg: &'a SynthConfig) -> Self {
        let ex: Vec<Example> = examples
            .pairs()
            .iter()
            .map(|(i, o)| Example {
                input: i.chars().collect(),
                output: o.chars().collect(),
            })
            .collect();
        let final_state = ex.iter().map(|e| e.output.len()).collect();
        Search {
            ex,
            ranker,
            cfg,
            started: Instant::now(),
            groups: Vec::new(),
            transitions: HashMap::new(),
            memo: HashMap::new(),
            final_state,
        }
    }

    fn check_deadline(&self) -> Result<(), SynthError> {
        match self.cfg.deadline {
            Some(d) if self.started.elapsed() > d => Err(SynthError::Deadline(d)),
            _ => Ok(()),
        }
    }

    fn run(&mut self) -> Result<Vec<Ranked<Program>>, SynthError> {
        self.build_groups()?;
        let k = self.cfg.top_k;
        let start: State = vec![0; self.ex.len()];
        let concat_base = self.ranker.weights().concat;
        let mut out: Vec<Ranked<Program>> = Vec::new();
        let transitions = self.transitions(&start)?;
        for (next, atoms) in transitions.iter() {
            if *next == self.final_state {
                out.extend(atoms.iter().map(|a| Ranked {
                    score: a.score,
                    size: a.size,
                    text: a.text.clone(),
                    value: Program::Atom(a.value.clone()),
                }));
            } else if *next != start && self.cfg.max_concat_parts >= 2 {
                let rest = self.best(next, self.cfg.max_concat_parts - 1)?;
                for seq in self.prepend(atoms, &rest) {
                    out.push(Ranked {
                        score: seq.score - concat_base,
                        size: seq.size + 1,
                        text: format!("(concat {}", seq.text),
                        value: Program::Concat(seq.atoms),
                    });
                }
            }
            keep_best(&mut out, k);
        }
        keep_best(&mut out, k);
        Ok(out)
    }

    /// Top-k part sequences of at most `budget` parts from `state` to the final state.
    fn best(&mut self, state: &State, budget: usize) -> Result<Rc<Vec<Seq>>, SynthError> {
        let key = (state.clone(), budget);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        self.check_deadline()?;
        let mut out: Vec<Seq> = Vec::new();
        let transitions = self.transitions(state)?;
        for (next, atoms) in transitions.iter() {
            if next == state {
                continue;
            }
            if *next == self.final_state {
                let end = Seq {
                    score: Score::ZERO,
                    size: 0,
                    text: ")".into(),
                    atoms: Vec::new(),
                };
                out.extend(self.prepend(atoms, &[end]));
            } else if budget >= 2 {
                let rest = self.best(next, budget - 1)?;
                out.extend(self.prepend(atoms, &rest));
            }
            self.trim(&mut out);
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn trim(&self, seqs: &mut Vec<Seq>) {
        seqs.sort_by(|a, b| {
            b.score
                .cmp(&a.score)
                .then(a.size.cmp(&b.size))
                .then_with(|| a.text.cmp(&b.text))
        });
        seqs.truncate(self.cfg.top_k);
    }

    fn prepend(&self, atoms: &[Ranked<Atom>], rest: &[Seq]) -> Vec<Seq> {
        let part = self.ranker.weights().concat_part;
        let mut out = Vec::with_capacity(atoms.len() * rest.len());
        for a in atoms {
            for r in rest {
                let mut parts = Vec::with_capacity(r.atoms.len() + 1);
                parts.push(a.value.clone());
                parts.extend(r.atoms.iter().cloned());
                let sep = if r.atoms.is_empty() { "" } else { " " };
                out.push(Seq {
                    score: a.score - part + r.score,
                    size: a.size + r.size,
                    text: format!("{}{sep}{}", a.text, r.text),
                    atoms: parts,
                });
            }
        }
        self.trim(&mut out);
        out
    }

    fn build_groups(&mut self) -> Result<(), SynthError> {
        let patterns = enumerate_patterns(&self.cfg.tokens, self.cfg.max_pattern_len)
            .into_iter()
            .filter(|p| !p.tokens().iter().any(Token::is_extended))
            .collect::<Vec<TokenPattern>>();
        let mut tables: Vec<PatternTable> = self
            .ex
            .iter()
            .map(|e| PatternTable::new(&patterns, &e.input))
            .collect();
        let n0 = self.ex[0].input.len();
        let max_k = self.cfg.max_k_abs;
        let k = self.cfg.top_k;
        let mut groups = Vec::with_capacity(n0 + 1);
        for target in 0..=n0 {
            self.check_deadline()?;
            let mut by_vec: HashMap<Vec<usize>, Vec<Ranked<Pos>>> = HashMap::new();
            let mut add = |pos: Pos, resolved: Vec<usize>| {
                let text = pos.to_string();
                let ranked = Ranked {
                    score: self.ranker.score_pos(&pos),
                    size: crate::dsl::Node::Pos(&pos).size(),
                    text,
                    value: pos,
                };
                by_vec.entry(resolved).or_default().push(ranked);
            };
            for pos in cpos_at(target, n0) {
                let Pos::CPos(c) = pos else { unreachable!() };
                let resolved: Option<Vec<usize>> = self
                    .ex
                    .iter()
                    .map(|e| {
                        let len = e.input.len() as i64;
                        let idx = if c >= 0 { c } else { len + 1 + c };
                        (0..=len).contains(&idx).then_some(idx as usize)
                    })
                    .collect();
                if let Some(resolved) = resolved {
                    add(pos, resolved);
                }
            }
            let triples = rpos_at(&mut tables[0], target, max_k);
            for (l, r, kk) in triples {
                let resolved: Option<Vec<usize>> =
                    tables.iter_mut().map(|t| t.resolve(l, r, kk)).collect();
                if let Some(resolved) = resolved {
                    add(rpos(&patterns, l, r, kk), resolved);
                }
            }
            let mut list: Vec<PosGroup> = by_vec
                .into_iter()
                .map(|(resolved, mut best)| {
                    keep_best(&mut best, k);
                    PosGroup { resolved, best }
                })
                .collect();
            list.sort_by(|a, b| a.resolved.cmp(&b.resolved));
            groups.push(list);
        }
        self.groups = groups;
        Ok(())
    }

    fn transitions(
        &mut self,
        state: &State,
    ) -> Result<Transitions, SynthError> {
        if let Some(hit) = self.transitions.get(state) {
            return Ok(hit.clone());
        }
        self.check_deadline()?;
        let k = self.cfg.top_k;
        let substr_w = self.ranker.weights().substr;
        let mut by_next: HashMap<State, Vec<Ranked<Atom>>> = HashMap::new();
        let o1 = state[0];
        let out1 = &self.ex[0].output;
        let at_final = *state == self.final_state;
        for e1 in o1..=out1.len() {
            let target = &out1[o1..e1];
            if !target.is_empty() && target.len() <= self.cfg.max_const_len
                || target.is_empty() && at_final
            {
                let fits = self
                    .ex
                    .iter()
                    .zip(state)
                    .all(|(e, &o)| e.output[o..].starts_with(target));
                if fits {
                    let next: State = state.iter().map(|o| o + target.len()).collect();
                    let atom = Atom::ConstStr(target.iter().collect());
                    by_next.entry(next).or_default().push(self.ranked_atom(atom));
                }
            }
            for (a, b) in spans(&self.ex[0].input, target) {
                for ga in &self.groups[a] {
                    for gb in &self.groups[b] {
                        let Some(next) = self.substr_next(state, e1, &ga.resolved, &gb.resolved) else {
                            continue;
                        };
                        if next == *state && !at_final {
                            continue;
                        }
                        let entry = by_next.entry(next).or_default();
                        for pa in ga.best.iter() {
                            for pb in gb.best.iter() {
                                entry.push(Ranked {
                                    score: pa.score + pb.score - substr_w,
                                    size: pa.size + pb.size + 1,
                                    text: format!("(substr {} {})", pa.text, pb.text),
                                    value: Atom::SubStr(pa.value.clone(), pb.value.clone()),
                                });
                            }
                        }
                        if entry.len() > 4 * k {
                            keep_best(entry, k);
                        }
                    }
                }
            }
        }
        let mut list: Vec<(State, Vec<Ranked<Atom>>)> = by_next
            .into_iter()
            .map(|(next, mut atoms)| {
                keep_best(&mut atoms, k);
                (next, atoms)
            })
            .collect();
        list.sort_by(|a, b| a.0.cmp(&b.0));
        let list = Rc::new(list);
        self.transitions.insert(state.clone(), list.clone());
        Ok(list)
    }

    fn substr_next(&self, state: &State, e1: usize, starts: &[usize], ends: &[usize]) -> Option<State> {
        let mut next = Vec::with_capacity(state.len());
        next.push(e1);
        for j in 1..self.ex.len() {
            let (s, e) = (starts[j], ends[j]);
            if s > e {
                return None;
            }
            let o = state[j];
            let len = e - s;
            let out = &self.ex[j].output;
            if o + len > out.len() || self.ex[j].input[s..e] != out[o..o + len] {
                return None;
            }
            next.push(o + len);
        }
        Some(next)
    }

    fn ranked_atom(&self, atom: Atom) -> Ranked<Atom> {
        Ranked {
            score: self.ranker.score_atom(&atom),
            size: crate::dsl::Node::Atom(&atom).size(),
            text: atom.to_string(),
            value: atom,
        }
    }
}
