//! Emits programs as standalone Python 3 source.
//!
//! The emitted module defines `transform(x)`, which returns the program's output or `None`
//! wherever the interpreter would report an error. Regex positions are compiled to a small
//! boundary-scanning helper, so the output needs nothing beyond the standard library.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dsl::{Atom, Pos, Program, Side, Token, TokenPattern};

/// Source text for one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedSource {
    pub text: String,
    pub profile: &'static str,
}

/// A code-generation target.
pub trait TargetProfile {
    fn id(&self) -> &'static str;
    fn file_extension(&self) -> &'static str;
    fn emit(&self, p: &Program) -> String;
}

/// Python 3 output.
pub struct Python3;

/// Emits `p` with the bundled Python profile.
pub fn translate(p: &Program) -> EmittedSource {
    translate_with(&Python3, p)
}

pub fn translate_with(profile: &dyn TargetProfile, p: &Program) -> EmittedSource {
    EmittedSource {
        text: profile.emit(p),
        profile: profile.id(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Helper {
    Match,
    Rpos,
    Find,
    Pick,
}

struct Emitter {
    lines: Vec<String>,
    helpers: BTreeSet<Helper>,
    next_var: usize,
}

impl TargetProfile for Python3 {
    fn id(&self) -> &'static str {
        "python3"
    }

    fn file_extension(&self) -> &'static str {
        "py"
    }

    fn emit(&self, p: &Program) -> String {
        let mut em = Emitter {
            lines: Vec::new(),
            helpers: BTreeSet::new(),
            next_var: 0,
        };
        let exprs: Option<Vec<String>> = p.parts().iter().map(|a| em.atom(a)).collect();
        let body = match exprs {
            Some(exprs) => {
                let mut body = em.lines;
                body.push(format!("return {}", exprs.join(" + ")));
                body
            }
            None => vec!["return None".to_string()],
        };

        let mut out = String::new();
        out.push_str("# Generated by qpbe from:\n");
        let _ = writeln!(out, "#   {p}");
        if !em.helpers.is_empty() {
            out.push('\n');
            if em.helpers.contains(&Helper::Match) {
                out.push_str(CLASSES_PY);
                out.push_str("\n\n");
                out.push_str(MATCH_PY);
            }
            if em.helpers.contains(&Helper::Rpos) {
                out.push_str("\n\n");
                out.push_str(RPOS_PY);
            }
            if em.helpers.contains(&Helper::Find) {
                out.push_str("\n\n");
                out.push_str(FIND_PY);
            }
            if em.helpers.contains(&Helper::Pick) {
                out.push_str("\n\n");
                out.push_str(PICK_PY);
            }
        }
        out.push_str("\n\ndef transform(x):\n");
        for line in body {
            let _ = writeln!(out, "    {line}");
        }
        out
    }
}

/// Where a constant index lands: `len(x) - offset` when `from_end`, else `offset`.
#[derive(Clone, Copy)]
struct Fixed {
    offset: usize,
    from_end: bool,
}

fn fixed(p: &Pos) -> Option<Fixed> {
    match p {
        Pos::CPos(k) if *k >= 0 => Some(Fixed {
            offset: *k as usize,
            from_end: false,
        }),
        Pos::CPos(k) => Some(Fixed {
            offset: (-(k + 1)) as usize,
            from_end: true,
        }),
        _ => None,
    }
}

impl Emitter {
    fn fresh(&mut self) -> String {
        let v = format!("i{}", self.next_var);
        self.next_var += 1;
        v
    }

    fn guard(&mut self, cond: String) {
        self.lines.push(format!("if {cond}:"));
        self.lines.push("    return None".to_string());
    }

    /// Expression for the atom's value, or `None` if the atom fails on every input.
    fn atom(&mut self, a: &Atom) -> Option<String> {
        match a {
            Atom::ConstStr(s) => Some(py_str(s)),
            Atom::SubStr(x, y) => match (fixed(x), fixed(y)) {
                (Some(s), Some(e)) => self.fixed_slice(s, e),
                _ => {
                    let s = self.pos(x);
                    let e = self.pos(y);
                    self.guard(format!("{s} > {e}"));
                    Some(format!("x[{s}:{e}]"))
                }
            },
        }
    }

    fn fixed_slice(&mut self, s: Fixed, e: Fixed) -> Option<String> {
        // Valid lengths n satisfy lo <= n <= hi.
        let mut lo = s.offset.max(e.offset);
        let mut hi: Option<usize> = None;
        match (s.from_end, e.from_end) {
            (false, false) if s.offset > e.offset => return None,
            (true, true) if s.offset < e.offset => return None,
            (false, true) => lo = lo.max(s.offset + e.offset),
            (true, false) => hi = Some(s.offset + e.offset),
            _ => {}
        }
        match hi {
            Some(h) if h < lo => return None,
            Some(h) if h == lo => self.guard(format!("len(x) != {h}")),
            Some(h) => self.guard(format!("not {lo} <= len(x) <= {h}")),
            None if lo > 0 => self.guard(format!("len(x) < {lo}")),
            None => {}
        }
        let index = |f: Fixed, is_end: bool| match (f.from_end, f.offset) {
            (false, 0) if !is_end => String::new(),
            (false, k) => k.to_string(),
            (true, 0) if is_end => String::new(),
            (true, 0) => "len(x)".to_string(),
            (true, d) => format!("-{d}"),
        };
        Some(format!("x[{}:{}]", index(s, false), index(e, true)))
    }

    fn pos(&mut self, p: &Pos) -> String {
        let v = self.fresh();
        match p {
            Pos::CPos(k) if *k >= 0 => {
                self.guard(format!("len(x) < {k}"));
                self.lines.push(format!("{v} = {k}"));
            }
            Pos::CPos(k) => {
                let d = -(k + 1);
                if d > 0 {
                    self.guard(format!("len(x) < {d}"));
                    self.lines.push(format!("{v} = len(x) - {d}"));
                } else {
                    self.lines.push(format!("{v} = len(x)"));
                }
            }
            Pos::RPos { left, right, k } => {
                self.helpers.extend([Helper::Match, Helper::Rpos, Helper::Pick]);
                self.lines.push(format!(
                    "{v} = _rpos(x, {}, {}, {k})",
                    py_pattern(left),
                    py_pattern(right)
                ));
                self.guard(format!("{v} is None"));
            }
            Pos::FindPos { needle, k, side } => {
                self.helpers.extend([Helper::Find, Helper::Pick]);
                let after = if *side == Side::After { "True" } else { "False" };
                self.lines.push(format!("{v} = _find(x, {}, {k}, {after})", py_str(needle)));
                self.guard(format!("{v} is None"));
            }
        }
        v
    }
}

fn py_pattern(p: &TokenPattern) -> String {
    let toks: Vec<String> = p
        .tokens()
        .iter()
        .map(|t| match t {
            Token::Literal(s) => format!("(\"lit\", {})", py_str(s)),
            other => format!("\"{}\"", other.name()),
        })
        .collect();
    match toks.len() {
        0 => "()".to_string(),
        1 => format!("({},)", toks[0]),
        _ => format!("({})", toks.join(", ")),
    }
}

/// A double-quoted Python string literal.
pub fn py_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c if c.is_control() || ('\u{2028}'..='\u{2029}').contains(&c) => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

const CLASSES_PY: &str = r#"_CLASSES = {
    "digits": "0123456789",
    "alpha": "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz",
    "lower": "abcdefghijklmnopqrstuvwxyz",
    "upper": "ABCDEFGHIJKLMNOPQRSTUVWXYZ",
    "ws": " \t\n\r\x0b\x0c",
    "slash": "/",
    "dash": "-",
    "comma": ",",
    "dot": ".",
    "colon": ":",
}
"#;

const MATCH_PY: &str = r#"def _match(x, pattern, i):
    n = len(x)
    for tok in pattern:
        if tok == "start":
            if i != 0:
                return None
        elif tok == "end":
            if i != n:
                return None
        elif isinstance(tok, tuple):
            lit = tok[1]
            if not x.startswith(lit, i):
                return None
            i += len(lit)
        else:
            cls = _CLASSES[tok]
            if i >= n or x[i] not in cls or (i > 0 and x[i - 1] in cls):
                return None
            i += 1
            while i < n and x[i] in cls:
                i += 1
    return i
"#;

const RPOS_PY: &str = r#"def _rpos(x, left, right, k):
    n = len(x)
    ends = [False] * (n + 1)
    for s in range(n + 1):
        e = _match(x, left, s)
        if e is not None:
            ends[e] = True
    hits = [q for q in range(n + 1) if ends[q] and _match(x, right, q) is not None]
    return _pick(hits, k)
"#;

const FIND_PY: &str = r#"def _find(x, needle, k, after):
    hits = []
    i = x.find(needle)
    while i != -1:
        hits.append(i + len(needle) if after else i)
        i = x.find(needle, i + 1)
    return _pick(hits, k)
"#;

const PICK_PY: &str = r#"def _pick(hits, k):
    if k > 0:
        return hits[k - 1] if k <= len(hits) else None
    return hits[len(hits) + k] if -k <= len(hits) else None
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn emit(src: &str) -> String {
        translate(&parse(src).unwrap()).text
    }

    #[test]
    fn constant_slice() {
        let text = emit("(substr (cpos 15) (cpos 25))");
        assert!(text.contains("    if len(x) < 25:\n        return None\n    return x[15:25]\n"));
        assert!(!text.contains("_match"));
    }

    #[test]
    fn fixed_slice_shapes() {
        assert!(emit("(substr (cpos 0) (cpos -1))").ends_with("    return x[:]\n"));
        assert!(emit("(substr (cpos 2) (cpos -3))").contains("if len(x) < 4:"));
        assert!(emit("(substr (cpos 2) (cpos -3))").ends_with("return x[2:-2]\n"));
        assert!(emit("(substr (cpos -4) (cpos 5))").contains("if not 5 <= len(x) <= 8:"));
        assert!(emit("(substr (cpos -4) (cpos 1))").contains("if not 3 <= len(x) <= 4:"));
        assert!(emit("(substr (cpos -1) (cpos 3))").contains("if len(x) != 3:"));
        assert!(emit("(substr (cpos 3) (cpos 1))").ends_with("    return None\n"));
    }

    #[test]
    fn helpers_only_when_needed() {
        let text = emit(r#"(substr (findpos ":" 1 after) (cpos -1))"#);
        assert!(text.contains("def _find"));
        assert!(text.contains("def _pick"));
        assert!(!text.contains("def _rpos"));
        let text = emit("(substr (rpos (ws) (\"x\") 1) (cpos -1))");
        assert!(text.contains(r#"i0 = _rpos(x, ("ws",), (("lit", "x"),), 1)"#), "{text}");
    }

    #[test]
    fn string_escaping() {
        assert_eq!(py_str("a\"b"), r#""a\"b""#);
        assert_eq!(py_str("\\\n\u{1}é"), r#""\\\n\x01é""#);
    }

    #[test]
    fn emission_is_deterministic() {
        let src = r#"(concat (conststr "a") (substr (rpos (digits) () -1) (findpos "/" 2 before)))"#;
        assert_eq!(emit(src), emit(src));
    }
}
