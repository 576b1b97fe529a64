//! Ranking functions over (sub)programs.
//!
//! Every ranker scores a node as the negated sum of per-node weights over the subtree rooted at
//! it. The additive form makes each ranker monotonic: swapping a subprogram for a higher-scoring
//! one raises the score of any enclosing program by exactly the difference.
//!
//! Weights are fixed-point decimals with three fractional digits, loaded from small key-value
//! files. The shipped defaults live in `weights/*.weights` and are embedded at build time.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsl::{Atom, Node, Pos, Program, Term, Token};

/// Fixed-point decimal with a denominator of 1000.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Score(i64);

impl Score {
    pub const ZERO: Score = Score(0);
    const SCALE: i64 = 1000;

    pub fn from_milli(milli: i64) -> Self {
        Score(milli)
    }

    pub fn from_int(v: i64) -> Self {
        Score(v * Self::SCALE)
    }

    pub fn milli(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    fn times(self, n: usize) -> Score {
        Score(self.0 * n as i64)
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, rhs: Score) -> Score {
        Score(self.0 + rhs.0)
    }
}

impl Sub for Score {
    type Output = Score;
    fn sub(self, rhs: Score) -> Score {
        Score(self.0 - rhs.0)
    }
}

impl Neg for Score {
    type Output = Score;
    fn neg(self) -> Score {
        Score(-self.0)
    }
}

impl std::iter::Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, Add::add)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let (int, frac) = (abs / 1000, abs % 1000);
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let frac = format!("{frac:03}");
            write!(f, "{sign}{int}.{}", frac.trim_end_matches('0'))
        }
    }
}

impl FromStr for Score {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(format!("'{s}' is not a number"));
        }
        if frac.len() > 3 {
            return Err(format!("'{s}' has more than three fractional digits"));
        }
        let digits = |d: &str| d.chars().all(|c| c.is_ascii_digit());
        if !digits(int) || !digits(frac) {
            return Err(format!("'{s}' is not a number"));
        }
        let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| format!("'{s}' is out of range"))? };
        let frac_milli: i64 = if frac.is_empty() {
            0
        } else {
            format!("{frac:0<3}").parse().unwrap()
        };
        let v = int * 1000 + frac_milli;
        Ok(Score(if neg { -v } else { v }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankerName {
    Intent,
    Size,
    Perf,
}

impl RankerName {
    pub fn as_str(self) -> &'static str {
        match self {
            RankerName::Intent => "intent",
            RankerName::Size => "size",
            RankerName::Perf => "perf",
        }
    }

    fn default_text(self) -> &'static str {
        match self {
            RankerName::Intent => include_str!("../weights/intent.weights"),
            RankerName::Size => include_str!("../weights/size.weights"),
            RankerName::Perf => include_str!("../weights/perf.weights"),
        }
    }
}

impl fmt::Display for RankerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankerName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intent" => Ok(RankerName::Intent),
            "size" => Ok(RankerName::Size),
            "perf" => Ok(RankerName::Perf),
            other => Err(format!("unknown ranker '{other}'")),
        }
    }
}

const TOKEN_KEYS: [&str; 13] = [
    "digits", "alpha", "lower", "upper", "ws", "slash", "dash", "comma", "dot", "colon", "start", "end",
    "literal",
];

fn token_index(t: &Token) -> usize {
    match t {
        Token::Literal(_) => 12,
        other => TOKEN_KEYS.iter().position(|k| *k == other.name()).unwrap(),
    }
}

/// Per-node-kind weights. All weights are nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub concat: Score,
    pub concat_part: Score,
    pub const_str: Score,
    pub const_char: Score,
    pub substr: Score,
    pub cpos: Score,
    pub cpos_neg: Score,
    pub rpos: Score,
    pub findpos: Score,
    /// Indexed like [`Token::CLASSES`], with literal tokens last.
    pub tokens: [Score; 13],
}

impl Weights {
    fn zero() -> Self {
        Weights {
            concat: Score::ZERO,
            concat_part: Score::ZERO,
            const_str: Score::ZERO,
            const_char: Score::ZERO,
            substr: Score::ZERO,
            cpos: Score::ZERO,
            cpos_neg: Score::ZERO,
            rpos: Score::ZERO,
            findpos: Score::ZERO,
            tokens: [Score::ZERO; 13],
        }
    }

    fn slot(&mut self, key: &str) -> Option<&mut Score> {
        Some(match key {
            "concat" => &mut self.concat,
            "concat_part" => &mut self.concat_part,
            "const_str" => &mut self.const_str,
            "const_char" => &mut self.const_char,
            "substr" => &mut self.substr,
            "cpos" => &mut self.cpos,
            "cpos_neg" => &mut self.cpos_neg,
            "rpos" => &mut self.rpos,
            "findpos" => &mut self.findpos,
            _ => {
                let name = key.strip_prefix("token.")?;
                let i = TOKEN_KEYS.iter().position(|k| *k == name)?;
                &mut self.tokens[i]
            }
        })
    }

    pub fn token(&self, t: &Token) -> Score {
        self.tokens[token_index(t)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WeightsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: weight for '{key}' is negative")]
    Negative { line: usize, key: String },
    #[error("unsupported weights version {0}")]
    Version(u32),
    #[error("weights file does not name a ranker")]
    MissingRanker,
}

/// A named, weighted scoring function over programs and their subprograms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranker {
    name: RankerName,
    weights: Weights,
}

impl Ranker {
    pub fn intent() -> Self {
        Self::shipped(RankerName::Intent)
    }

    pub fn size() -> Self {
        Self::shipped(RankerName::Size)
    }

    pub fn perf() -> Self {
        Self::shipped(RankerName::Perf)
    }

    pub fn shipped(name: RankerName) -> Self {
        Self::parse_weights(name.default_text()).expect("shipped weights parse")
    }

    pub fn with_weights(name: RankerName, weights: Weights) -> Self {
        Ranker { name, weights }
    }

    /// Parses a weights file. Keys not present keep the shipped default of the named ranker.
    ///
    /// ```text
    /// version = 1
    /// ranker = perf
    /// rpos = 40
    /// token = 4.5
    /// token.literal = 2
    /// ```
    pub fn parse_weights(text: &str) -> Result<Ranker, WeightsError> {
        let mut entries = Vec::new();
        let mut name = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| WeightsError::Syntax {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "version" => {
                    let v: u32 = value.parse().map_err(|_| WeightsError::Syntax {
                        line,
                        message: format!("bad version '{value}'"),
                    })?;
                    if v != 1 {
                        return Err(WeightsError::Version(v));
                    }
                }
                "ranker" => {
                    name = Some(value.parse::<RankerName>().map_err(|message| WeightsError::Syntax { line, message })?);
                }
                _ => entries.push((line, key.to_string(), value.to_string())),
            }
        }
        let name = name.ok_or(WeightsError::MissingRanker)?;
        let mut weights = if text == name.default_text() {
            Weights::zero()
        } else {
            Ranker::shipped(name).weights
        };
        for (line, key, value) in entries {
            let score: Score = value.parse().map_err(|message| WeightsError::Syntax { line, message })?;
            if score < Score::ZERO {
                return Err(WeightsError::Negative { line, key });
            }
            if key == "token" {
                weights.tokens = [score; 13];
                continue;
            }
            let slot = weights
                .slot(&key)
                .ok_or(WeightsError::UnknownKey { line, key: key.clone() })?;
            *slot = score;
        }
        Ok(Ranker { name, weights })
    }

    /// Renders the weights in the file format accepted by [`Ranker::parse_weights`].
    pub fn to_weights_text(&self) -> String {
        let w = &self.weights;
        let mut out = format!("version = 1\nranker = {}\n", self.name);
        for (key, v) in [
            ("concat", w.concat),
            ("concat_part", w.concat_part),
            ("const_str", w.const_str),
            ("const_char", w.const_char),
            ("substr", w.substr),
            ("cpos", w.cpos),
            ("cpos_neg", w.cpos_neg),
            ("rpos", w.rpos),
            ("findpos", w.findpos),
        ] {
            out.push_str(&format!("{key} = {v}\n"));
        }
        for (key, v) in TOKEN_KEYS.iter().zip(w.tokens) {
            out.push_str(&format!("token.{key} = {v}\n"));
        }
        out
    }

    pub fn name(&self) -> RankerName {
        self.name
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn score(&self, p: &Program) -> Score {
        -self.cost_node(p.node())
    }

    pub fn score_node(&self, node: Node<'_>) -> Score {
        -self.cost_node(node)
    }

    pub fn score_term(&self, term: &Term) -> Score {
        self.score_node(term.node())
    }

    pub fn score_atom(&self, a: &Atom) -> Score {
        -self.atom_cost(a)
    }

    pub fn score_pos(&self, p: &Pos) -> Score {
        -self.pos_cost(p)
    }

    /// Weight of the concatenation node itself for `parts` parts, excluding the parts.
    pub fn concat_cost(&self, parts: usize) -> Score {
        self.weights.concat + self.weights.concat_part.times(parts)
    }

    fn cost_node(&self, node: Node<'_>) -> Score {
        match node {
            Node::Concat(parts) => {
                self.concat_cost(parts.len()) + parts.iter().map(|a| self.atom_cost(a)).sum()
            }
            Node::Atom(a) => self.atom_cost(a),
            Node::Pos(p) => self.pos_cost(p),
            Node::Token(t) => self.weights.token(t),
        }
    }

    pub(crate) fn atom_cost(&self, a: &Atom) -> Score {
        let w = &self.weights;
        match a {
            Atom::ConstStr(s) => w.const_str + w.const_char.times(s.chars().count()),
            Atom::SubStr(x, y) => w.substr + self.pos_cost(x) + self.pos_cost(y),
        }
    }

    pub(crate) fn pos_cost(&self, p: &Pos) -> Score {
        let w = &self.weights;
        match p {
            Pos::CPos(k) if *k >= 0 => w.cpos,
            Pos::CPos(_) => w.cpos_neg,
            Pos::RPos { left, right, .. } => {
                w.rpos
                    + left
                        .tokens()
                        .iter()
                        .chain(right.tokens())
                        .map(|t| w.token(t))
                        .sum()
            }
            Pos::FindPos { .. } => w.findpos,
        }
    }
}
