//! S-expression text format for programs.
//!
//! ```text
//! (concat (conststr "a") (substr (cpos 15) (cpos 25)))
//! (substr (rpos (ws) (digits) 1) (findpos "and" -1 after))
//! ```
//!
//! Golden files depend on this format; keep it stable.

use std::fmt::Write as _;

use super::{Atom, Pos, Program, Side, Token, TokenPattern};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub(super) fn serialize(p: &Program) -> String {
    match p {
        Program::Atom(a) => serialize_atom(a),
        Program::Concat(parts) => {
            let mut out = String::from("(concat");
            for part in parts {
                out.push(' ');
                out.push_str(&serialize_atom(part));
            }
            out.push(')');
            out
        }
    }
}

pub(super) fn serialize_atom(a: &Atom) -> String {
    match a {
        Atom::ConstStr(s) => format!("(conststr {})", quote(s)),
        Atom::SubStr(x, y) => format!("(substr {} {})", serialize_pos(x), serialize_pos(y)),
    }
}

pub(super) fn serialize_pos(p: &Pos) -> String {
    match p {
        Pos::CPos(k) => format!("(cpos {k})"),
        Pos::RPos { left, right, k } => {
            format!("(rpos {} {} {k})", serialize_pattern(left), serialize_pattern(right))
        }
        Pos::FindPos { needle, k, side } => {
            let side = match side {
                Side::Before => "before",
                Side::After => "after",
            };
            format!("(findpos {} {k} {side})", quote(needle))
        }
    }
}

fn serialize_pattern(p: &TokenPattern) -> String {
    let toks: Vec<String> = p.tokens().iter().map(serialize_token).collect();
    format!("({})", toks.join(" "))
}

pub(super) fn serialize_token(t: &Token) -> String {
    match t {
        Token::Literal(s) => quote(s),
        other => other.name().to_string(),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Lexeme {
    Open,
    Close,
    Word(String),
    Str(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    lexeme: Lexeme,
    line: usize,
    col: usize,
}

struct Cursor<'s> {
    chars: std::iter::Peekable<std::str::Chars<'s>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        let lexeme = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '(' => {
                cur.bump();
                Lexeme::Open
            }
            ')' => {
                cur.bump();
                Lexeme::Close
            }
            '"' => {
                cur.bump();
                Lexeme::Str(lex_string(&mut cur).map_err(|mut e| {
                    if e.message == "unterminated string" {
                        (e.line, e.col) = (line, col);
                    }
                    e
                })?)
            }
            _ => {
                let mut w = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    w.push(c);
                    cur.bump();
                }
                Lexeme::Word(w)
            }
        };
        out.push(Spanned { lexeme, line, col });
    }
    Ok(out)
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    let mut s = String::new();
    loop {
        let c = cur.bump().ok_or_else(|| cur.error("unterminated string"))?;
        match c {
            '"' => return Ok(s),
            '\\' => {
                let e = cur.bump().ok_or_else(|| cur.error("unterminated string"))?;
                match e {
                    'n' => s.push('\n'),
                    't' => s.push('\t'),
                    'r' => s.push('\r'),
                    '"' => s.push('"'),
                    '\\' => s.push('\\'),
                    'u' => {
                        if cur.bump() != Some('{') {
                            return Err(cur.error("expected '{' after \\u"));
                        }
                        let mut hex = String::new();
                        loop {
                            match cur.bump() {
                                Some('}') => break,
                                Some(h) if h.is_ascii_hexdigit() => hex.push(h),
                                _ => return Err(cur.error("bad \\u escape")),
                            }
                        }
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| cur.error("invalid scalar value"))?;
                        s.push(ch);
                    }
                    _ => return Err(cur.error("unknown escape")),
                }
            }
            c => s.push(c),
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    end: (usize, usize),
}

impl Parser {
    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self
            .toks
            .get(self.at)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end);
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Lexeme> {
        self.toks.get(self.at).map(|t| &t.lexeme)
    }

    fn next(&mut self) -> Option<Lexeme> {
        let t = self.toks.get(self.at).map(|t| t.lexeme.clone());
        self.at += 1;
        t
    }

    fn expect_open(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Lexeme::Open) => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.error_here("expected '('")),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Lexeme::Close) => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.error_here("expected ')'")),
        }
    }

    fn word(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Lexeme::Word(_)) => match self.next() {
                Some(Lexeme::Word(w)) => Ok(w),
                _ => unreachable!(),
            },
            _ => Err(self.error_here("expected a keyword or number")),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Lexeme::Str(_)) => match self.next() {
                Some(Lexeme::Str(s)) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.error_here("expected a string literal")),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let here = self.at;
        let w = self.word()?;
        w.parse().map_err(|_| {
            self.at = here;
            self.error_here(format!("expected an integer, found '{w}'"))
        })
    }

    fn nonzero(&mut self) -> Result<i64, ParseError> {
        let here = self.at;
        let k = self.int()?;
        if k == 0 {
            self.at = here;
            return Err(self.error_here("occurrence ordinal must be nonzero"));
        }
        Ok(k)
    }

    fn head(&mut self) -> Result<String, ParseError> {
        self.expect_open()?;
        self.word()
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let save = self.at;
        if self.head()? == "concat" {
            let mut parts = Vec::new();
            while self.peek() == Some(&Lexeme::Open) {
                parts.push(self.atom()?);
            }
            if parts.is_empty() {
                return Err(self.error_here("concat needs at least one part"));
            }
            self.expect_close()?;
            Ok(Program::Concat(parts))
        } else {
            self.at = save;
            Ok(Program::Atom(self.atom()?))
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let here = self.at;
        let head = self.head()?;
        let atom = match head.as_str() {
            "conststr" => Atom::ConstStr(self.string()?),
            "substr" => {
                let a = self.pos()?;
                let b = self.pos()?;
                Atom::SubStr(a, b)
            }
            other => {
                self.at = here + 1;
                return Err(self.error_here(format!("expected conststr or substr, found '{other}'")));
            }
        };
        self.expect_close()?;
        Ok(atom)
    }

    fn pos(&mut self) -> Result<Pos, ParseError> {
        let here = self.at;
        let head = self.head()?;
        let pos = match head.as_str() {
            "cpos" => Pos::CPos(self.int()?),
            "rpos" => {
                let left = self.pattern()?;
                let right = self.pattern()?;
                let k = self.nonzero()?;
                Pos::RPos { left, right, k }
            }
            "findpos" => {
                let needle = self.string()?;
                if needle.is_empty() {
                    self.at -= 1;
                    return Err(self.error_here("needle must be nonempty"));
                }
                let k = self.nonzero()?;
                let side = match self.word()?.as_str() {
                    "before" => Side::Before,
                    "after" => Side::After,
                    _ => {
                        self.at -= 1;
                        return Err(self.error_here("expected 'before' or 'after'"));
                    }
                };
                Pos::FindPos { needle, k, side }
            }
            other => {
                self.at = here + 1;
                return Err(self.error_here(format!("expected a position, found '{other}'")));
            }
        };
        self.expect_close()?;
        Ok(pos)
    }

    fn pattern(&mut self) -> Result<TokenPattern, ParseError> {
        self.expect_open()?;
        let mut toks = Vec::new();
        loop {
            match self.peek() {
                Some(Lexeme::Close) => {
                    self.at += 1;
                    break;
                }
                Some(Lexeme::Str(_)) => {
                    let s = self.string()?;
                    if s.is_empty() {
                        self.at -= 1;
                        return Err(self.error_here("literal token must be nonempty"));
                    }
                    toks.push(Token::Literal(s));
                }
                Some(Lexeme::Word(_)) => {
                    let here = self.at;
                    let w = self.word()?;
                    let tok = Token::from_name(&w).ok_or_else(|| {
                        self.at = here;
                        self.error_here(format!("unknown token '{w}'"))
                    })?;
                    toks.push(tok);
                }
                _ => return Err(self.error_here("expected a token or ')'")),
            }
        }
        let last = toks.len().saturating_sub(1);
        for (i, t) in toks.iter().enumerate() {
            let misplaced = matches!((t, i), (Token::StartAnchor, i) if i != 0)
                || matches!((t, i), (Token::EndAnchor, i) if i != last);
            if misplaced {
                self.at -= 1;
                return Err(self.error_here("anchor in the wrong place in a pattern"));
            }
        }
        Ok(TokenPattern::new(toks))
    }
}

/// Parses the text produced by `Program`'s `Display` implementation.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let end = src
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    let mut parser = Parser { toks, at: 0, end };
    let program = parser.program()?;
    if parser.at < parser.toks.len() {
        return Err(parser.error_here("trailing input after program"));
    }
    Ok(program)
}
