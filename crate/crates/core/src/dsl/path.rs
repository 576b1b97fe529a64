use std::fmt;

use super::{Atom, Pos, Program, Token, TokenPattern, WellFormedError};

/// Child indices from the root of a program to one of its nodes.
///
/// Children are numbered as follows: a concatenation's parts in order; a substring's start
/// and end positions as 0 and 1; a regex position's left tokens followed by its right tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramPath(Vec<usize>);

impl ProgramPath {
    pub fn root() -> Self {
        ProgramPath(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.clone();
        path.0.push(index);
        path
    }

    pub fn push(&mut self, index: usize) {
        self.0.push(index);
    }

    pub fn pop(&mut self) -> Option<usize> {
        self.0.pop()
    }
}

impl From<Vec<usize>> for ProgramPath {
    fn from(v: Vec<usize>) -> Self {
        ProgramPath(v)
    }
}

impl fmt::Display for ProgramPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// Borrowed view of one AST node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node<'a> {
    Concat(&'a [Atom]),
    Atom(&'a Atom),
    Pos(&'a Pos),
    Token(&'a Token),
}

/// Owned counterpart of [`Node`], used as a replacement value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Concat(Vec<Atom>),
    Atom(Atom),
    Pos(Pos),
    Token(Token),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplaceError {
    #[error("no node at {0}")]
    NoSuchNode(ProgramPath),
    #[error("cannot place a {found} where a {expected} is expected (at {path})")]
    SymbolMismatch {
        path: ProgramPath,
        expected: &'static str,
        found: &'static str,
    },
    #[error("replacement is ill-formed: {0}")]
    IllFormed(#[from] WellFormedError),
}

impl<'a> Node<'a> {
    pub fn symbol(&self) -> &'static str {
        match self {
            Node::Concat(_) => "concat",
            Node::Atom(_) => "atom",
            Node::Pos(_) => "position",
            Node::Token(_) => "token",
        }
    }

    pub fn children(&self) -> Vec<Node<'a>> {
        match *self {
            Node::Concat(parts) => parts.iter().map(Node::Atom).collect(),
            Node::Atom(Atom::SubStr(a, b)) => vec![Node::Pos(a), Node::Pos(b)],
            Node::Atom(Atom::ConstStr(_)) => Vec::new(),
            Node::Pos(Pos::RPos { left, right, .. }) => left
                .tokens()
                .iter()
                .chain(right.tokens())
                .map(Node::Token)
                .collect(),
            Node::Pos(_) | Node::Token(_) => Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Node::size).sum::<usize>()
    }

    pub fn to_term(&self) -> Term {
        match *self {
            Node::Concat(parts) => Term::Concat(parts.to_vec()),
            Node::Atom(a) => Term::Atom(a.clone()),
            Node::Pos(p) => Term::Pos(p.clone()),
            Node::Token(t) => Term::Token(t.clone()),
        }
    }
}

impl Term {
    pub fn node(&self) -> Node<'_> {
        match self {
            Term::Concat(parts) => Node::Concat(parts),
            Term::Atom(a) => Node::Atom(a),
            Term::Pos(p) => Node::Pos(p),
            Term::Token(t) => Node::Token(t),
        }
    }
}

impl Program {
    pub fn node(&self) -> Node<'_> {
        match self {
            Program::Concat(parts) => Node::Concat(parts),
            Program::Atom(a) => Node::Atom(a),
        }
    }

    /// Every node with its path, in preorder. The first entry is the root.
    pub fn subprograms(&self) -> Vec<(ProgramPath, Node<'_>)> {
        fn walk<'a>(node: Node<'a>, path: &mut ProgramPath, out: &mut Vec<(ProgramPath, Node<'a>)>) {
            out.push((path.clone(), node));
            for (i, child) in node.children().into_iter().enumerate() {
                path.push(i);
                walk(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self.node(), &mut ProgramPath::root(), &mut out);
        out
    }

    pub fn get(&self, path: &ProgramPath) -> Option<Node<'_>> {
        let mut node = self.node();
        for &i in path.indices() {
            node = node.children().into_iter().nth(i)?;
        }
        Some(node)
    }

    /// Returns a copy of the program with the node at `path` replaced by `term`.
    pub fn replace(&self, path: &ProgramPath, term: Term) -> Result<Program, ReplaceError> {
        let replaced = match (self, path.indices()) {
            (_, []) => match term {
                Term::Concat(parts) => Program::Concat(parts),
                Term::Atom(a) => Program::Atom(a),
                other => return Err(mismatch(path, "atom", &other)),
            },
            (Program::Concat(parts), [i, rest @ ..]) => {
                let part = parts
                    .get(*i)
                    .ok_or_else(|| ReplaceError::NoSuchNode(path.clone()))?;
                let mut parts = parts.clone();
                parts[*i] = replace_in_atom(part, rest, term, path)?;
                Program::Concat(parts)
            }
            (Program::Atom(a), rest) => Program::Atom(replace_in_atom(a, rest, term, path)?),
        };
        replaced.validate()?;
        Ok(replaced)
    }
}

fn mismatch(path: &ProgramPath, expected: &'static str, found: &Term) -> ReplaceError {
    ReplaceError::SymbolMismatch {
        path: path.clone(),
        expected,
        found: found.node().symbol(),
    }
}

fn replace_in_atom(
    atom: &Atom,
    rest: &[usize],
    term: Term,
    full: &ProgramPath,
) -> Result<Atom, ReplaceError> {
    match (atom, rest) {
        (_, []) => match term {
            Term::Atom(a) => Ok(a),
            other => Err(mismatch(full, "atom", &other)),
        },
        (Atom::SubStr(a, b), [i, tail @ ..]) if *i < 2 => {
            let (mut a, mut b) = (a.clone(), b.clone());
            let slot = if *i == 0 { &mut a } else { &mut b };
            *slot = replace_in_pos(slot, tail, term, full)?;
            Ok(Atom::SubStr(a, b))
        }
        _ => Err(ReplaceError::NoSuchNode(full.clone())),
    }
}

fn replace_in_pos(pos: &Pos, rest: &[usize], term: Term, full: &ProgramPath) -> Result<Pos, ReplaceError> {
    match (pos, rest) {
        (_, []) => match term {
            Term::Pos(p) => Ok(p),
            other => Err(mismatch(full, "position", &other)),
        },
        (Pos::RPos { left, right, k }, [i]) => {
            let Term::Token(tok) = term else {
                return Err(mismatch(full, "token", &term));
            };
            let mut l = left.tokens().to_vec();
            let mut r = right.tokens().to_vec();
            if *i < l.len() {
                l[*i] = tok;
            } else if *i - l.len() < r.len() {
                r[*i - l.len()] = tok;
            } else {
                return Err(ReplaceError::NoSuchNode(full.clone()));
            }
            Ok(Pos::RPos {
                left: TokenPattern::new(l),
                right: TokenPattern::new(r),
                k: *k,
            })
        }
        _ => Err(ReplaceError::NoSuchNode(full.clone())),
    }
}
