use super::token::boundaries;
use super::{Atom, Pos, Program, ProgramPath, Side};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at {path}")]
pub struct EvalError {
    pub path: ProgramPath,
    pub kind: EvalErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalErrorKind {
    #[error("position {index} outside [0, {len}]")]
    OutOfRange { index: i64, len: usize },
    #[error("wanted occurrence {k} but only {found} exist")]
    TooFewMatches { k: i64, found: usize },
    #[error("substring start {start} is after end {end}")]
    Inverted { start: usize, end: usize },
}

/// Runs `program` on `input`.
pub fn eval(program: &Program, input: &str) -> Result<String, EvalError> {
    let chars: Vec<char> = input.chars().collect();
    eval_chars(program, &chars)
}

/// Like [`eval`] for an input already split into scalar values.
pub fn eval_chars(program: &Program, input: &[char]) -> Result<String, EvalError> {
    match program {
        Program::Atom(a) => eval_atom(a, input, ProgramPath::root()),
        Program::Concat(parts) => {
            let mut out = String::new();
            for (i, part) in parts.iter().enumerate() {
                out.push_str(&eval_atom(part, input, ProgramPath::from(vec![i]))?);
            }
            Ok(out)
        }
    }
}

fn eval_atom(atom: &Atom, input: &[char], path: ProgramPath) -> Result<String, EvalError> {
    match atom {
        Atom::ConstStr(s) => Ok(s.clone()),
        Atom::SubStr(a, b) => {
            let start = resolve_pos(a, input).map_err(|kind| EvalError {
                path: path.child(0),
                kind,
            })?;
            let end = resolve_pos(b, input).map_err(|kind| EvalError {
                path: path.child(1),
                kind,
            })?;
            if start > end {
                return Err(EvalError {
                    path,
                    kind: EvalErrorKind::Inverted { start, end },
                });
            }
            Ok(input[start..end].iter().collect())
        }
    }
}

/// Resolves a position expression against `input`.
pub fn resolve_pos(pos: &Pos, input: &[char]) -> Result<usize, EvalErrorKind> {
    let len = input.len();
    match pos {
        Pos::CPos(k) => {
            let index = if *k >= 0 { *k } else { len as i64 + 1 + k };
            if index < 0 || index > len as i64 {
                Err(EvalErrorKind::OutOfRange { index: *k, len })
            } else {
                Ok(index as usize)
            }
        }
        Pos::RPos { left, right, k } => pick(&boundaries(left, right, input), *k),
        Pos::FindPos { needle, k, side } => {
            let needle: Vec<char> = needle.chars().collect();
            let starts = occurrences(input, &needle);
            let start = pick(&starts, *k)?;
            Ok(match side {
                Side::Before => start,
                Side::After => start + needle.len(),
            })
        }
    }
}

fn pick(candidates: &[usize], k: i64) -> Result<usize, EvalErrorKind> {
    let found = candidates.len();
    let index = if k > 0 {
        (k as usize).checked_sub(1).filter(|&i| i < found)
    } else if k < 0 {
        found.checked_sub(k.unsigned_abs() as usize)
    } else {
        None
    };
    index
        .map(|i| candidates[i])
        .ok_or(EvalErrorKind::TooFewMatches { k, found })
}

/// Start indices of every (possibly overlapping) occurrence of `needle`.
fn occurrences(haystack: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| haystack[i..i + needle.len()] == *needle)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Token, TokenPattern};

    fn substr(a: Pos, b: Pos) -> Program {
        Program::Atom(Atom::SubStr(a, b))
    }

    #[test]
    fn constant_slice_of_two_date_input() {
        let p = substr(Pos::CPos(15), Pos::CPos(25));
        assert_eq!(eval(&p, "06/08/2010 and 08/05/2010").unwrap(), "08/05/2010");
    }

    #[test]
    fn constant_string() {
        let p = Program::Atom(Atom::ConstStr("a".into()));
        assert_eq!(eval(&p, "anything").unwrap(), "a");
    }

    #[test]
    fn regex_position() {
        let p = substr(
            Pos::RPos {
                left: TokenPattern::new(vec![Token::Whitespace]),
                right: TokenPattern::new(vec![Token::Digits]),
                k: 1,
            },
            Pos::CPos(-1),
        );
        assert_eq!(eval(&p, "ab 12").unwrap(), "12");
    }

    #[test]
    fn whole_string_slice() {
        let p = substr(Pos::CPos(0), Pos::CPos(-1));
        assert_eq!(eval(&p, "héllo").unwrap(), "héllo");
        assert_eq!(eval(&p, "").unwrap(), "");
    }

    #[test]
    fn find_positions() {
        let before = Pos::FindPos {
            needle: "and".into(),
            k: 1,
            side: Side::After,
        };
        let p = substr(before, Pos::CPos(-1));
        assert_eq!(eval(&p, "x and y and z").unwrap(), " y and z");
        let last = Pos::FindPos {
            needle: "and".into(),
            k: -1,
            side: Side::Before,
        };
        let p = substr(Pos::CPos(0), last);
        assert_eq!(eval(&p, "x and y and z").unwrap(), "x and y ");
        // Overlapping occurrences count separately.
        let second = Pos::FindPos {
            needle: "aa".into(),
            k: 2,
            side: Side::Before,
        };
        assert_eq!(resolve_pos(&second, &['a', 'a', 'a']), Ok(1));
    }

    #[test]
    fn errors_name_the_failing_node() {
        let p = Program::Concat(vec![
            Atom::ConstStr("x".into()),
            Atom::SubStr(Pos::CPos(0), Pos::CPos(9)),
        ]);
        let err = eval(&p, "abc").unwrap_err();
        assert_eq!(err.path, ProgramPath::from(vec![1, 1]));
        assert_eq!(err.kind, EvalErrorKind::OutOfRange { index: 9, len: 3 });

        let p = substr(Pos::CPos(2), Pos::CPos(1));
        let err = eval(&p, "abc").unwrap_err();
        assert_eq!(err.path, ProgramPath::root());
        assert!(matches!(err.kind, EvalErrorKind::Inverted { .. }));

        let p = substr(
            Pos::RPos {
                left: TokenPattern::new(vec![Token::Digits]),
                right: TokenPattern::empty(),
                k: 2,
            },
            Pos::CPos(-1),
        );
        let err = eval(&p, "a1b").unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::TooFewMatches { k: 2, found: 1 });
        assert_eq!(err.path, ProgramPath::from(vec![0]));
    }

    #[test]
    fn negative_cpos_bounds() {
        let s: Vec<char> = "abc".chars().collect();
        assert_eq!(resolve_pos(&Pos::CPos(-1), &s), Ok(3));
        assert_eq!(resolve_pos(&Pos::CPos(-4), &s), Ok(0));
        assert!(resolve_pos(&Pos::CPos(-5), &s).is_err());
        assert!(resolve_pos(&Pos::CPos(4), &s).is_err());
    }
}
