//! Guarded rewrite rules from the core language into the extended one.
//!
//! A rule proposes replacements for a single node. A proposal is accepted only if the whole
//! rewritten program still reproduces every pair of the [`EquivSpec`], so rules may be
//! unsound in general and still be safe on the data the pipeline cares about.

pub mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{boundaries, eval, resolve_pos, Atom, Node, Pos, Program, ProgramPath, Side, Term, Token, TokenPattern};
use crate::synth::ExampleSet;

pub use search::{enumerative_synth, greedy, successors, RewriteError, RewriteOutcome, SearchConfig, TraceStep};

/// Inputs paired with the outputs a reference program produces on them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivSpec {
    pairs: Vec<(String, String)>,
}

impl EquivSpec {
    /// Runs `reference` on each distinct input. Inputs it fails on are returned separately and
    /// left out of the equivalence specification.
    pub fn from_reference<'a, I>(reference: &Program, inputs: I) -> (EquivSpec, Vec<String>)
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut failed = Vec::new();
        for input in inputs {
            if pairs.iter().any(|(i, _)| i == input) || failed.iter().any(|f| f == input) {
                continue;
            }
            match eval(reference, input) {
                Ok(out) => pairs.push((input.to_string(), out)),
                Err(_) => failed.push(input.to_string()),
            }
        }
        (EquivSpec { pairs }, failed)
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

    pub fn satisfied_by(&self, p: &Program) -> bool {
        self.pairs
            .iter()
            .all(|(i, o)| eval(p, i).is_ok_and(|got| got == *o))
    }

    pub fn to_examples(&self) -> ExampleSet {
        ExampleSet::new(self.pairs.iter().cloned())
    }

    fn char_inputs(&self) -> Vec<Vec<char>> {
        self.pairs.iter().map(|(i, _)| i.chars().collect()).collect()
    }
}

type Builder = fn(Node<'_>, &EquivSpec) -> Vec<Term>;

/// A node-local rewrite with a behavioral precondition.
#[derive(Clone, Copy)]
pub struct RewriteRule {
    pub id: &'static str,
    pub summary: &'static str,
    build: Builder,
}

impl fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RewriteRule").field("id", &self.id).finish()
    }
}

impl PartialEq for RewriteRule {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl RewriteRule {
    pub fn new(id: &'static str, summary: &'static str, build: Builder) -> Self {
        RewriteRule { id, summary, build }
    }

    /// Replacement candidates for `node`, before any precondition check.
    pub fn propose(&self, node: Node<'_>, spec: &EquivSpec) -> Vec<Term> {
        (self.build)(node, spec)
    }

    /// Whether the rewritten program may replace the original under `spec`.
    pub fn precondition(&self, rewritten: &Program, spec: &EquivSpec) -> bool {
        spec.satisfied_by(rewritten)
    }

    /// Every accepted rewrite of `p` at `path`, in proposal order.
    pub fn apply_at(&self, p: &Program, path: &ProgramPath, spec: &EquivSpec) -> Vec<Program> {
        let Some(node) = p.get(path) else {
            return Vec::new();
        };
        let mut out: Vec<Program> = Vec::new();
        for term in self.propose(node, spec) {
            if term == node.to_term() {
                continue;
            }
            let Ok(q) = p.replace(path, term) else { continue };
            if !out.contains(&q) && self.precondition(&q, spec) {
                out.push(q);
            }
        }
        out
    }
}

pub const R1: &str = "rpos_to_cpos";
pub const R2: &str = "rpos_to_find";
pub const R3: &str = "token_simplify";
pub const R4: &str = "const_fold";
pub const R5: &str = "cpos_normalize";

/// The shipped rule set, in greedy application order.
pub fn shipped_rules() -> Vec<RewriteRule> {
    vec![
        RewriteRule::new(R1, "regex position that is constant on every input becomes a constant index", rpos_to_cpos),
        RewriteRule::new(R2, "regex position around one literal-like token becomes a string search", rpos_to_find),
        RewriteRule::new(R3, "two-token pattern becomes one token or a literal with the same boundaries", token_simplify),
        RewriteRule::new(R4, "adjacent constant parts merge", const_fold),
        RewriteRule::new(R5, "constant index switches sign when all inputs have one length", cpos_normalize),
    ]
}

pub fn rule_by_id(id: &str) -> Option<RewriteRule> {
    shipped_rules().into_iter().find(|r| r.id == id)
}

/// The same value for every item, if there is one.
fn uniform<T: PartialEq>(mut items: impl Iterator<Item = T>) -> Option<T> {
    let first = items.next()?;
    items.all(|x| x == first).then_some(first)
}

fn resolved(pos: &Pos, inputs: &[Vec<char>]) -> Option<Vec<usize>> {
    inputs.iter().map(|s| resolve_pos(pos, s).ok()).collect()
}

fn rpos_to_cpos(node: Node<'_>, spec: &EquivSpec) -> Vec<Term> {
    let Node::Pos(pos @ Pos::RPos { .. }) = node else {
        return Vec::new();
    };
    let inputs = spec.char_inputs();
    let Some(qs) = resolved(pos, &inputs) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if let Some(q) = uniform(qs.iter().copied()) {
        out.push(Term::Pos(Pos::CPos(q as i64)));
    }
    if let Some(d) = uniform(inputs.iter().zip(&qs).map(|(s, q)| s.len() - q)) {
        out.push(Term::Pos(Pos::CPos(-(d as i64) - 1)));
    }
    out
}

fn occurrences(s: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > s.len() {
        return Vec::new();
    }
    (0..=s.len() - needle.len())
        .filter(|&i| s[i..i + needle.len()] == *needle)
        .collect()
}

fn rpos_to_find(node: Node<'_>, spec: &EquivSpec) -> Vec<Term> {
    let Node::Pos(pos @ Pos::RPos { left, right, k }) = node else {
        return Vec::new();
    };
    let (tok, side) = match (left.tokens(), right.tokens()) {
        ([t], []) => (t, Side::After),
        ([], [t]) => (t, Side::Before),
        _ => return Vec::new(),
    };
    let Some(needle) = tok.literal_text() else {
        return Vec::new();
    };
    let needle_chars: Vec<char> = needle.chars().collect();
    let mut ks = vec![*k];
    let inputs = spec.char_inputs();
    if let Some(qs) = resolved(pos, &inputs) {
        let hits: Option<Vec<(usize, usize)>> = inputs
            .iter()
            .zip(&qs)
            .map(|(s, &q)| {
                let occ = occurrences(s, &needle_chars);
                let at = |o: &usize| match side {
                    Side::Before => *o,
                    Side::After => o + needle_chars.len(),
                };
                occ.iter().position(|o| at(o) == q).map(|j| (j, occ.len()))
            })
            .collect();
        if let Some(hits) = hits {
            if let Some(j) = uniform(hits.iter().map(|(j, _)| *j)) {
                ks.push(j as i64 + 1);
            }
            if let Some(back) = uniform(hits.iter().map(|(j, m)| *j as i64 - *m as i64)) {
                ks.push(back);
            }
        }
    }
    let mut out: Vec<Term> = Vec::new();
    for k in ks {
        let t = Term::Pos(Pos::FindPos {
            needle: needle.clone(),
            k,
            side,
        });
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

fn token_simplify(node: Node<'_>, spec: &EquivSpec) -> Vec<Term> {
    let Node::Pos(pos @ Pos::RPos { left, right, k }) = node else {
        return Vec::new();
    };
    let inputs = spec.char_inputs();
    let Some(qs) = resolved(pos, &inputs) else {
        return Vec::new();
    };
    let before: Vec<Vec<usize>> = inputs.iter().map(|s| boundaries(left, right, s)).collect();
    let mut out = Vec::new();
    for is_left in [true, false] {
        let side = if is_left { left } else { right };
        if side.len() != 2 {
            continue;
        }
        let mut options: Vec<TokenPattern> = Token::CLASSES
            .iter()
            .map(|t| TokenPattern::new(vec![t.clone()]))
            .collect();
        let texts: Option<Vec<String>> = inputs
            .iter()
            .zip(&qs)
            .map(|(s, &q)| matched_text(side, s, q, is_left))
            .collect();
        if let Some(text) = texts.and_then(|t| uniform(t.into_iter())) {
            if !text.is_empty() {
                options.push(TokenPattern::new(vec![Token::Literal(text)]));
            }
        }
        for opt in options {
            let (l, r) = if is_left { (&opt, right) } else { (left, &opt) };
            let same = inputs
                .iter()
                .zip(&before)
                .all(|(s, b)| boundaries(l, r, s) == *b);
            if same {
                out.push(Term::Pos(Pos::RPos {
                    left: l.clone(),
                    right: r.clone(),
                    k: *k,
                }));
            }
        }
    }
    out
}

/// Text matched by `side` next to boundary `q`: ending there for a left pattern, starting there
/// for a right one.
fn matched_text(side: &TokenPattern, s: &[char], q: usize, is_left: bool) -> Option<String> {
    let (a, b) = if is_left {
        let start = (0..=q).rev().find(|&st| side.match_from(s, st) == Some(q))?;
        (start, q)
    } else {
        (q, side.match_from(s, q)?)
    };
    Some(s[a..b].iter().collect())
}

fn const_fold(node: Node<'_>, _spec: &EquivSpec) -> Vec<Term> {
    let Node::Concat(parts) = node else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for i in 0..parts.len().saturating_sub(1) {
        if let (Atom::ConstStr(a), Atom::ConstStr(b)) = (&parts[i], &parts[i + 1]) {
            let mut merged = parts.to_vec();
            merged[i] = Atom::ConstStr(format!("{a}{b}"));
            merged.remove(i + 1);
            out.push(Term::Concat(merged));
        }
    }
    out
}

fn cpos_normalize(node: Node<'_>, spec: &EquivSpec) -> Vec<Term> {
    let Node::Pos(Pos::CPos(k)) = node else {
        return Vec::new();
    };
    let Some(len) = uniform(spec.inputs().map(|i| i.chars().count() as i64)) else {
        return Vec::new();
    };
    let flipped = if *k >= 0 { *k - len - 1 } else { len + 1 + *k };
    vec![Term::Pos(Pos::CPos(flipped))]
}
