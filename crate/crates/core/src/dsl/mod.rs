//! The string-transformation language.
//!
//! A [`Program`] is either a single [`Atom`] or a concatenation of atoms. An atom is a constant
//! string or a substring of the task input delimited by two [`Pos`] expressions. The *core*
//! language is what the synthesizer searches; the *extended* language adds [`Pos::FindPos`] and
//! [`Token::Literal`], which only appear after local rewriting.
//!
//! All indices count Unicode scalar values, never bytes.

mod eval;
mod path;
mod text;
mod token;

pub use eval::{eval, eval_chars, resolve_pos, EvalError, EvalErrorKind};
pub use path::{Node, ProgramPath, ReplaceError, Term};
pub use text::{parse, ParseError};
pub use token::{boundaries, TokenPattern};

use std::fmt;

/// Root expression of a program (grammar symbol `e`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Program {
    /// Concatenation of one or more parts.
    Concat(Vec<Atom>),
    /// A single atom with no enclosing concatenation.
    Atom(Atom),
}

/// A string-producing leaf expression (grammar symbol `f`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    ConstStr(String),
    /// `input[start..end]`.
    SubStr(Pos, Pos),
}

/// An integer position in the input (grammar symbol `pos`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pos {
    /// Constant index. Negative values count from the end; `-1` is the end of the string.
    CPos(i64),
    /// The `k`-th boundary where `left` matches a substring ending there and `right` matches a
    /// substring starting there.
    RPos {
        left: TokenPattern,
        right: TokenPattern,
        k: i64,
    },
    /// Start or end of the `k`-th occurrence of `needle` (extended language only).
    FindPos { needle: String, k: i64, side: Side },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Before,
    After,
}

/// One element of a [`TokenPattern`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Digits,
    Alpha,
    Lower,
    Upper,
    Whitespace,
    Slash,
    Dash,
    Comma,
    Dot,
    Colon,
    StartAnchor,
    EndAnchor,
    /// Exact string match (extended language only).
    Literal(String),
}

impl Token {
    /// Every non-literal token, in canonical order.
    pub const CLASSES: [Token; 12] = [
        Token::Digits,
        Token::Alpha,
        Token::Lower,
        Token::Upper,
        Token::Whitespace,
        Token::Slash,
        Token::Dash,
        Token::Comma,
        Token::Dot,
        Token::Colon,
        Token::StartAnchor,
        Token::EndAnchor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Token::Digits => "digits",
            Token::Alpha => "alpha",
            Token::Lower => "lower",
            Token::Upper => "upper",
            Token::Whitespace => "ws",
            Token::Slash => "slash",
            Token::Dash => "dash",
            Token::Comma => "comma",
            Token::Dot => "dot",
            Token::Colon => "colon",
            Token::StartAnchor => "start",
            Token::EndAnchor => "end",
            Token::Literal(_) => "literal",
        }
    }

    pub fn from_name(name: &str) -> Option<Token> {
        Token::CLASSES.iter().find(|t| t.name() == name).cloned()
    }

    /// Whether `c` belongs to this token's character class. `None` for anchors and literals.
    pub fn class_contains(&self, c: char) -> Option<bool> {
        let hit = match self {
            Token::Digits => c.is_ascii_digit(),
            Token::Alpha => c.is_ascii_alphabetic(),
            Token::Lower => c.is_ascii_lowercase(),
            Token::Upper => c.is_ascii_uppercase(),
            Token::Whitespace => matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c'),
            Token::Slash => c == '/',
            Token::Dash => c == '-',
            Token::Comma => c == ',',
            Token::Dot => c == '.',
            Token::Colon => c == ':',
            Token::StartAnchor | Token::EndAnchor | Token::Literal(_) => return None,
        };
        Some(hit)
    }

    /// The exact text this token matches when every run of its class is a single fixed string.
    pub fn literal_text(&self) -> Option<String> {
        match self {
            Token::Literal(s) => Some(s.clone()),
            Token::Whitespace => Some(" ".to_string()),
            Token::Slash => Some("/".to_string()),
            Token::Dash => Some("-".to_string()),
            Token::Comma => Some(",".to_string()),
            Token::Dot => Some(".".to_string()),
            Token::Colon => Some(":".to_string()),
            _ => None,
        }
    }

    pub fn is_extended(&self) -> bool {
        matches!(self, Token::Literal(_))
    }
}

/// A structural defect that makes a program ill-formed.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WellFormedError {
    #[error("concat at {0} has no parts")]
    EmptyConcat(ProgramPath),
    #[error("occurrence ordinal at {0} is zero")]
    ZeroOrdinal(ProgramPath),
    #[error("start anchor at {0} is not the first token")]
    MisplacedStartAnchor(ProgramPath),
    #[error("end anchor at {0} is not the last token")]
    MisplacedEndAnchor(ProgramPath),
    #[error("empty literal or needle at {0}")]
    EmptyLiteral(ProgramPath),
}

impl Program {
    pub fn parts(&self) -> &[Atom] {
        match self {
            Program::Concat(parts) => parts,
            Program::Atom(a) => std::slice::from_ref(a),
        }
    }

    /// Builds the canonical program for a nonempty atom sequence: a bare atom for one part,
    /// a concatenation otherwise.
    pub fn from_parts(mut parts: Vec<Atom>) -> Program {
        if parts.len() == 1 {
            Program::Atom(parts.pop().unwrap())
        } else {
            Program::Concat(parts)
        }
    }

    /// Number of AST nodes, counting every position and every pattern token.
    pub fn size(&self) -> usize {
        self.node().size()
    }

    /// True if the program uses no extended-only construct.
    pub fn is_core(&self) -> bool {
        self.parts().iter().all(Atom::is_core)
    }

    pub fn validate(&self) -> Result<(), WellFormedError> {
        let mut path = ProgramPath::root();
        match self {
            Program::Concat(parts) if parts.is_empty() => Err(WellFormedError::EmptyConcat(path)),
            Program::Concat(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    path.push(i);
                    part.validate(&mut path)?;
                    path.pop();
                }
                Ok(())
            }
            Program::Atom(a) => a.validate(&mut path),
        }
    }
}

impl Atom {
    pub fn is_core(&self) -> bool {
        match self {
            Atom::ConstStr(_) => true,
            Atom::SubStr(a, b) => a.is_core() && b.is_core(),
        }
    }

    fn validate(&self, path: &mut ProgramPath) -> Result<(), WellFormedError> {
        if let Atom::SubStr(a, b) = self {
            path.push(0);
            a.validate(path)?;
            path.pop();
            path.push(1);
            b.validate(path)?;
            path.pop();
        }
        Ok(())
    }
}

impl Pos {
    pub fn is_core(&self) -> bool {
        match self {
            Pos::CPos(_) => true,
            Pos::RPos { left, right, .. } => left.is_core() && right.is_core(),
            Pos::FindPos { .. } => false,
        }
    }

    fn validate(&self, path: &mut ProgramPath) -> Result<(), WellFormedError> {
        match self {
            Pos::CPos(_) => Ok(()),
            Pos::RPos { left, right, k } => {
                if *k == 0 {
                    return Err(WellFormedError::ZeroOrdinal(path.clone()));
                }
                let mut index = 0;
                for pattern in [left, right] {
                    let last = pattern.len().saturating_sub(1);
                    for (i, tok) in pattern.tokens().iter().enumerate() {
                        path.push(index);
                        let res = match tok {
                            Token::StartAnchor if i != 0 => {
                                Err(WellFormedError::MisplacedStartAnchor(path.clone()))
                            }
                            Token::EndAnchor if i != last => {
                                Err(WellFormedError::MisplacedEndAnchor(path.clone()))
                            }
                            Token::Literal(s) if s.is_empty() => {
                                Err(WellFormedError::EmptyLiteral(path.clone()))
                            }
                            _ => Ok(()),
                        };
                        path.pop();
                        res?;
                        index += 1;
                    }
                }
                Ok(())
            }
            Pos::FindPos { needle, k, .. } => {
                if *k == 0 {
                    Err(WellFormedError::ZeroOrdinal(path.clone()))
                } else if needle.is_empty() {
                    Err(WellFormedError::EmptyLiteral(path.clone()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::serialize(self))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::serialize_atom(self))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::serialize_pos(self))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::serialize_token(self))
    }
}

impl std::str::FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
