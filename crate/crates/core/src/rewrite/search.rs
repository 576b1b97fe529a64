//! Local search over rewrite sequences.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dsl::{Node, Program, ProgramPath};
use crate::rank::{Ranker, Score};

use super::{EquivSpec, RewriteRule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of node expansions in the best-first phase.
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: 500 }
    }
}

/// One applied rewrite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    pub path: String,
    pub before: String,
    pub after: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub program: Program,
    /// Rewrites leading from the input program to `program`.
    pub trace: Vec<TraceStep>,
    pub greedy_applications: usize,
    pub expansions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("program {0} does not reproduce the equivalence specification")]
    SpecViolated(String),
}

/// Paths of every node, children before parents, left to right.
pub fn postorder_paths(p: &Program) -> Vec<ProgramPath> {
    fn walk(node: Node<'_>, path: &mut ProgramPath, out: &mut Vec<ProgramPath>) {
        for (i, child) in node.children().into_iter().enumerate() {
            path.push(i);
            walk(child, path, out);
            path.pop();
        }
        out.push(path.clone());
    }
    let mut out = Vec::new();
    walk(p.node(), &mut ProgramPath::root(), &mut out);
    out
}

fn step(rule: &RewriteRule, path: &ProgramPath, before: &Program, after: &Program) -> TraceStep {
    TraceStep {
        rule: rule.id.to_string(),
        path: path.to_string(),
        before: before.to_string(),
        after: after.to_string(),
    }
}

/// Every accepted single rewrite of `p`, rules in list order, positions leftmost-innermost.
pub fn successors(spec: &EquivSpec, p: &Program, rules: &[RewriteRule]) -> Vec<(TraceStep, Program)> {
    let paths = postorder_paths(p);
    let mut out = Vec::new();
    for rule in rules {
        for path in &paths {
            for q in rule.apply_at(p, path, spec) {
                out.push((step(rule, path, p, &q), q));
            }
        }
    }
    out
}

/// Applies the first strictly improving rewrite, in rule order then leftmost-innermost
/// position order, until none is left.
pub fn greedy(spec: &EquivSpec, ranker: &Ranker, p: &Program, rules: &[RewriteRule]) -> (Program, Vec<TraceStep>) {
    let mut cur = p.clone();
    let mut score = ranker.score(&cur);
    let mut trace = Vec::new();
    'outer: loop {
        for rule in rules {
            for path in postorder_paths(&cur) {
                for q in rule.apply_at(&cur, &path, spec) {
                    let s = ranker.score(&q);
                    if s > score {
                        trace.push(step(rule, &path, &cur, &q));
                        cur = q;
                        score = s;
                        continue 'outer;
                    }
                }
            }
        }
        return (cur, trace);
    }
}

type Key = (Reverse<Score>, usize, String);

fn key(ranker: &Ranker, p: &Program) -> Key {
    (Reverse(ranker.score(p)), p.size(), p.to_string())
}

/// Highest-ranked program found from `p` by a greedy pass followed by best-first search.
pub fn enumerative_synth(
    spec: &EquivSpec,
    ranker: &Ranker,
    p: &Program,
    rules: &[RewriteRule],
    cfg: &SearchConfig,
) -> Result<RewriteOutcome, RewriteError> {
    if !spec.satisfied_by(p) {
        return Err(RewriteError::SpecViolated(p.to_string()));
    }
    let (_, greedy_trace) = greedy(spec, ranker, p, rules);
    let greedy_applications = greedy_trace.len();

    let mut programs: HashMap<String, (Program, Option<(String, TraceStep)>)> = HashMap::new();
    let mut frontier: BTreeSet<Key> = BTreeSet::new();
    let origin = key(ranker, p);
    programs.insert(origin.2.clone(), (p.clone(), None));
    frontier.insert(origin.clone());
    let mut best = origin;
    let mut parent_text = best.2.clone();
    for s in greedy_trace {
        let q: Program = s.after.parse().expect("serialized programs parse");
        let k = key(ranker, &q);
        programs.insert(k.2.clone(), (q, Some((parent_text.clone(), s))));
        parent_text = k.2.clone();
        best = best.min(k.clone());
        frontier.insert(k);
    }

    let mut expansions = 0;
    while expansions < cfg.budget {
        let Some(top) = frontier.pop_first() else { break };
        expansions += 1;
        let prog = programs[&top.2].0.clone();
        for (s, q) in successors(spec, &prog, rules) {
            let k = key(ranker, &q);
            if programs.contains_key(&k.2) {
                continue;
            }
            programs.insert(k.2.clone(), (q, Some((top.2.clone(), s))));
            best = best.min(k.clone());
            frontier.insert(k);
        }
    }

    let mut trace = Vec::new();
    let mut cursor = best.2.clone();
    while let Some((parent, s)) = programs[&cursor].1.clone() {
        trace.push(s);
        cursor = parent;
    }
    trace.reverse();
    Ok(RewriteOutcome {
        program: programs[&best.2].0.clone(),
        trace,
        greedy_applications,
        expansions,
    })
}
