//! Inverse semantics of the DSL operators.

use std::collections::HashMap;

use crate::dsl::{Pos, Token, TokenPattern};

use super::SynthConfig;

/// Every way to split `output` into a nonempty first part and a (possibly empty) rest.
///
/// The empty output has no splits; it can only be produced by a single atom.
pub fn witness_concat(output: &str) -> Vec<(String, String)> {
    output
        .char_indices()
        .skip(1)
        .map(|(i, _)| i)
        .chain(std::iter::once(output.len()))
        .filter(|&i| i > 0)
        .map(|i| (output[..i].to_string(), output[i..].to_string()))
        .collect()
}

/// Every span `(a, b)` with `input[a..b] == output`, in increasing order. Indices count chars.
pub fn witness_substr(input: &str, output: &str) -> Vec<(usize, usize)> {
    let input: Vec<char> = input.chars().collect();
    let output: Vec<char> = output.chars().collect();
    spans(&input, &output)
}

pub(crate) fn spans(input: &[char], output: &[char]) -> Vec<(usize, usize)> {
    if output.len() > input.len() {
        return Vec::new();
    }
    (0..=input.len() - output.len())
        .filter(|&a| input[a..a + output.len()] == *output)
        .map(|a| (a, a + output.len()))
        .collect()
}

/// Every position expression within the configured bounds that resolves to `target` on `input`.
///
/// Constant positions are returned in both sign conventions. Regex positions use patterns of
/// at most `cfg.max_pattern_len` tokens drawn from `cfg.tokens`, with `|k| <= cfg.max_k_abs`;
/// the pair of two empty patterns is never produced.
pub fn witness_pos(input: &str, target: usize, cfg: &SynthConfig) -> Vec<Pos> {
    let chars: Vec<char> = input.chars().collect();
    if target > chars.len() {
        return Vec::new();
    }
    let patterns = enumerate_patterns(&cfg.tokens, cfg.max_pattern_len);
    let mut table = PatternTable::new(&patterns, &chars);
    let mut out = cpos_at(target, chars.len());
    out.extend(
        rpos_at(&mut table, target, cfg.max_k_abs)
            .into_iter()
            .map(|(l, r, k)| rpos(&patterns, l, r, k)),
    );
    out
}

pub(crate) fn cpos_at(target: usize, len: usize) -> Vec<Pos> {
    vec![
        Pos::CPos(target as i64),
        Pos::CPos(target as i64 - len as i64 - 1),
    ]
}

pub(crate) fn rpos(patterns: &[TokenPattern], l: usize, r: usize, k: i64) -> Pos {
    Pos::RPos {
        left: patterns[l].clone(),
        right: patterns[r].clone(),
        k,
    }
}

/// Every pattern of up to `max_len` tokens with anchors only at their legal ends.
/// The empty pattern comes first.
pub fn enumerate_patterns(tokens: &[Token], max_len: usize) -> Vec<TokenPattern> {
    let mut out = vec![TokenPattern::empty()];
    let mut frontier: Vec<Vec<Token>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            if prefix.last() == Some(&Token::EndAnchor) {
                continue;
            }
            for tok in tokens {
                if *tok == Token::StartAnchor && !prefix.is_empty() {
                    continue;
                }
                let mut seq = prefix.clone();
                seq.push(tok.clone());
                out.push(TokenPattern::new(seq.clone()));
                next.push(seq);
            }
        }
        frontier = next;
    }
    out
}

/// Match tables of a fixed pattern list over one input.
pub(crate) struct PatternTable {
    ends: Vec<Vec<bool>>,
    starts: Vec<Vec<bool>>,
    len: usize,
    cache: HashMap<(usize, usize), Vec<usize>>,
}

impl PatternTable {
    pub(crate) fn new(patterns: &[TokenPattern], input: &[char]) -> Self {
        PatternTable {
            ends: patterns.iter().map(|p| p.ends(input)).collect(),
            starts: patterns.iter().map(|p| p.starts(input)).collect(),
            len: input.len(),
            cache: HashMap::new(),
        }
    }

    pub(crate) fn boundaries(&mut self, l: usize, r: usize) -> &[usize] {
        let (ends, starts, len) = (&self.ends, &self.starts, self.len);
        self.cache.entry((l, r)).or_insert_with(|| {
            (0..=len)
                .filter(|&q| ends[l][q] && starts[r][q])
                .collect()
        })
    }

    /// Resolves `RPos(patterns[l], patterns[r], k)` on this input.
    pub(crate) fn resolve(&mut self, l: usize, r: usize, k: i64) -> Option<usize> {
        let b = self.boundaries(l, r);
        let m = b.len() as i64;
        let idx = if k > 0 { k - 1 } else { m + k };
        (0..m).contains(&idx).then(|| b[idx as usize])
    }
}

/// `(left, right, k)` index triples of every regex position resolving to `target`.
pub(crate) fn rpos_at(table: &mut PatternTable, target: usize, max_k: usize) -> Vec<(usize, usize, i64)> {
    let lefts: Vec<usize> = (0..table.ends.len()).filter(|&i| table.ends[i][target]).collect();
    let rights: Vec<usize> = (0..table.starts.len()).filter(|&i| table.starts[i][target]).collect();
    let mut out = Vec::new();
    for &l in &lefts {
        for &r in &rights {
            if l == 0 && r == 0 {
                continue;
            }
            let b = table.boundaries(l, r);
            let m = b.len();
            let j = b.binary_search(&target).expect("target is a boundary");
            if j < max_k {
                out.push((l, r, j as i64 + 1));
            }
            if m - j <= max_k {
                out.push((l, r, j as i64 - m as i64));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::resolve_pos;

    #[test]
    fn concat_splits() {
        let got = witness_concat("abc");
        let want: Vec<(String, String)> = [("a", "bc"), ("ab", "c"), ("abc", "")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(got, want);
        assert!(witness_concat("").is_empty());
        assert_eq!(witness_concat("é1").len(), 2);
    }

    #[test]
    fn substr_spans() {
        assert_eq!(witness_substr("abab", "ab"), vec![(0, 2), (2, 4)]);
        assert_eq!(witness_substr("abc", "zz"), vec![]);
        assert_eq!(
            witness_substr("06/08/2010 and 08/05/2010", "08/05/2010"),
            vec![(15, 25)]
        );
    }

    #[test]
    fn pos_witnesses_resolve_to_target() {
        let cfg = SynthConfig::default();
        let input = "ab 12";
        let s: Vec<char> = input.chars().collect();
        for t in 0..=s.len() {
            for p in witness_pos(input, t, &cfg) {
                assert_eq!(resolve_pos(&p, &s), Ok(t), "{p}");
            }
        }
        let at3 = witness_pos(input, 3, &cfg);
        assert!(at3.contains(&Pos::CPos(3)));
        assert!(at3.contains(&Pos::CPos(-3)));
        assert!(at3.contains(&Pos::RPos {
            left: TokenPattern::new(vec![Token::Whitespace]),
            right: TokenPattern::new(vec![Token::Digits]),
            k: 1
        }));
        let at0 = witness_pos(input, 0, &cfg);
        assert!(at0.contains(&Pos::CPos(0)));
        assert!(at0.contains(&Pos::RPos {
            left: TokenPattern::new(vec![Token::StartAnchor]),
            right: TokenPattern::empty(),
            k: 1
        }));
        assert!(witness_pos("a/b", 2, &cfg).contains(&Pos::RPos {
            left: TokenPattern::new(vec![Token::Slash]),
            right: TokenPattern::new(vec![Token::Alpha]),
            k: 1
        }));
    }

    #[test]
    fn pattern_enumeration_respects_anchor_placement() {
        let pats = enumerate_patterns(&Token::CLASSES, 2);
        assert_eq!(pats[0], TokenPattern::empty());
        assert_eq!(pats.len(), 1 + 12 + 11 * 11);
        let unique: std::collections::HashSet<_> = pats.iter().collect();
        assert_eq!(unique.len(), pats.len());
    }
}
