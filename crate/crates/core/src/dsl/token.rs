use super::Token;

/// A sequence of tokens matched back to back.
///
/// Class tokens match a maximal nonempty run of their class, so matching from a given start
/// index is deterministic: each token either fails or consumes exactly one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenPattern(Vec<Token>);

impl TokenPattern {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenPattern(tokens)
    }

    pub fn empty() -> Self {
        TokenPattern(Vec::new())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_core(&self) -> bool {
        !self.0.iter().any(Token::is_extended)
    }

    /// End index of the match starting at `start`, if the pattern matches there.
    pub fn match_from(&self, s: &[char], start: usize) -> Option<usize> {
        let mut i = start;
        for tok in &self.0 {
            i = match_token(tok, s, i)?;
        }
        Some(i)
    }

    /// `ends[q]` is true when some match of the pattern ends at `q`.
    pub fn ends(&self, s: &[char]) -> Vec<bool> {
        let mut ends = vec![false; s.len() + 1];
        for start in 0..=s.len() {
            if let Some(end) = self.match_from(s, start) {
                ends[end] = true;
            }
        }
        ends
    }

    /// `starts[q]` is true when some match of the pattern starts at `q`.
    pub fn starts(&self, s: &[char]) -> Vec<bool> {
        (0..=s.len()).map(|q| self.match_from(s, q).is_some()).collect()
    }
}

impl From<Vec<Token>> for TokenPattern {
    fn from(tokens: Vec<Token>) -> Self {
        TokenPattern(tokens)
    }
}

fn match_token(tok: &Token, s: &[char], i: usize) -> Option<usize> {
    let n = s.len();
    match tok {
        Token::StartAnchor => (i == 0).then_some(i),
        Token::EndAnchor => (i == n).then_some(i),
        Token::Literal(lit) => {
            let mut j = i;
            for c in lit.chars() {
                if j >= n || s[j] != c {
                    return None;
                }
                j += 1;
            }
            Some(j)
        }
        class => {
            let inside = |c: char| class.class_contains(c).unwrap_or(false);
            if i >= n || !inside(s[i]) || (i > 0 && inside(s[i - 1])) {
                return None;
            }
            let mut j = i + 1;
            while j < n && inside(s[j]) {
                j += 1;
            }
            Some(j)
        }
    }
}

/// All boundary positions, in increasing order, where `left` ends and `right` starts.
pub fn boundaries(left: &TokenPattern, right: &TokenPattern, s: &[char]) -> Vec<usize> {
    let ends = left.ends(s);
    (0..=s.len())
        .filter(|&q| ends[q] && right.match_from(s, q).is_some())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn class_tokens_match_maximal_runs() {
        let s = chars("ab 12");
        let digits = TokenPattern::new(vec![Token::Digits]);
        assert_eq!(digits.match_from(&s, 3), Some(5));
        // Not the start of a run.
        assert_eq!(digits.match_from(&s, 4), None);
        assert_eq!(digits.ends(&s), vec![false, false, false, false, false, true]);
    }

    #[test]
    fn empty_pattern_matches_everywhere() {
        let s = chars("xyz");
        let e = TokenPattern::empty();
        assert!(e.ends(&s).iter().all(|&b| b));
        assert!(e.starts(&s).iter().all(|&b| b));
    }

    #[test]
    fn hand_enumerated_boundaries() {
        let s = chars("ab 12");
        let ws = TokenPattern::new(vec![Token::Whitespace]);
        let digits = TokenPattern::new(vec![Token::Digits]);
        assert_eq!(boundaries(&ws, &digits, &s), vec![3]);
        let alpha = TokenPattern::new(vec![Token::Alpha]);
        assert_eq!(boundaries(&alpha, &TokenPattern::empty(), &s), vec![2]);
        let start = TokenPattern::new(vec![Token::StartAnchor]);
        assert_eq!(boundaries(&start, &TokenPattern::empty(), &s), vec![0]);
        let end = TokenPattern::new(vec![Token::EndAnchor]);
        assert_eq!(boundaries(&TokenPattern::empty(), &end, &s), vec![5]);
    }

    #[test]
    fn literal_and_two_token_patterns() {
        let s = chars("06/08/2010 and 08/05/2010");
        let and = TokenPattern::new(vec![Token::Literal(" and ".into())]);
        assert_eq!(boundaries(&and, &TokenPattern::empty(), &s), vec![15]);
        let slash_digits = TokenPattern::new(vec![Token::Slash, Token::Digits]);
        assert_eq!(
            boundaries(&slash_digits, &TokenPattern::empty(), &s),
            vec![5, 10, 20, 25]
        );
    }

    #[test]
    fn unicode_counts_scalars() {
        let s = chars("é12");
        let digits = TokenPattern::new(vec![Token::Digits]);
        assert_eq!(digits.match_from(&s, 1), Some(3));
    }
}
