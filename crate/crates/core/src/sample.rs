//! Syntactic profiling of inputs and representative sampling of a corpus.

use std::collections::HashMap;
use std::fmt;

/// Character class of one run in a [`Profile`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunClass {
    Digit,
    Alpha,
    Whitespace,
    /// ASCII punctuation; each character is its own class.
    Punct(char),
    Other,
}

impl RunClass {
    fn of(c: char) -> RunClass {
        if c.is_ascii_digit() {
            RunClass::Digit
        } else if c.is_ascii_alphabetic() {
            RunClass::Alpha
        } else if matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c') {
            RunClass::Whitespace
        } else if c.is_ascii_punctuation() {
            RunClass::Punct(c)
        } else {
            RunClass::Other
        }
    }
}

impl fmt::Display for RunClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunClass::Digit => f.write_str("Digit"),
            RunClass::Alpha => f.write_str("Alpha"),
            RunClass::Whitespace => f.write_str("Ws"),
            RunClass::Punct(c) => write!(f, "'{c}'"),
            RunClass::Other => f.write_str("Other"),
        }
    }
}

/// Class skeleton of a string: the classes of its maximal runs, lengths dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(pub Vec<RunClass>);

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

pub fn profile(input: &str) -> Profile {
    let mut runs: Vec<RunClass> = Vec::new();
    for c in input.chars() {
        let class = RunClass::of(c);
        if runs.last() != Some(&class) {
            runs.push(class);
        }
    }
    Profile(runs)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SampleError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("sample size must be at least 1")]
    ZeroSize,
}

/// Picks up to `n` distinct inputs covering as many profiles as possible.
///
/// Inputs are grouped by profile in order of first appearance, then taken round-robin across
/// groups, earliest first within each group. The result preserves selection order.
pub fn representative_sample<S: AsRef<str>>(corpus: &[S], n: usize) -> Result<Vec<String>, SampleError> {
    if corpus.is_empty() {
        return Err(SampleError::EmptyCorpus);
    }
    if n == 0 {
        return Err(SampleError::ZeroSize);
    }
    let mut index: HashMap<Profile, usize> = HashMap::new();
    let mut groups: Vec<Vec<&str>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for s in corpus {
        let s = s.as_ref();
        if !seen.insert(s) {
            continue;
        }
        let slot = *index.entry(profile(s)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(s);
    }
    let target = n.min(seen.len());
    let mut out = Vec::with_capacity(target);
    let mut round = 0;
    while out.len() < target {
        for g in &groups {
            if out.len() == target {
                break;
            }
            if let Some(s) = g.get(round) {
                out.push(s.to_string());
            }
        }
        round += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn date_profile() {
        assert_eq!(
            profile("06/08/2010").0,
            vec![
                RunClass::Digit,
                RunClass::Punct('/'),
                RunClass::Digit,
                RunClass::Punct('/'),
                RunClass::Digit
            ]
        );
        assert_eq!(profile("").0, vec![]);
        assert_eq!(profile("10/20"), profile("1/2"));
        assert_ne!(profile("10/20"), profile("a-b"));
        assert_eq!(profile("10/20").to_string(), "[Digit '/' Digit]");
    }

    #[test]
    fn single_cluster_takes_earliest() {
        let corpus: Vec<String> = (0..100).map(|i| format!("{i:03}")).collect();
        let got = representative_sample(&corpus, 20).unwrap();
        assert_eq!(got, corpus[..20].to_vec());
    }

    #[test]
    fn small_cluster_is_covered() {
        let mut corpus: Vec<String> = (0..99).map(|i| format!("{i}")).collect();
        corpus.push("x-y".into());
        let got = representative_sample(&corpus, 2).unwrap();
        assert_eq!(got, vec!["0".to_string(), "x-y".to_string()]);
    }

    #[test]
    fn oversized_request_returns_all_distinct() {
        let corpus = ["a", "b", "a", "1"];
        let got = representative_sample(&corpus, 10).unwrap();
        assert_eq!(got, vec!["a", "1", "b"]);
    }

    #[test]
    fn errors() {
        let empty: [&str; 0] = [];
        assert_eq!(representative_sample(&empty, 3), Err(SampleError::EmptyCorpus));
        assert_eq!(representative_sample(&["a"], 0), Err(SampleError::ZeroSize));
    }

    proptest! {
        #[test]
        fn sample_properties(corpus in prop::collection::vec("[a1/ -]{0,5}", 1..30), n in 1usize..12) {
            let s = representative_sample(&corpus, n).unwrap();
            let distinct: std::collections::HashSet<&String> = corpus.iter().collect();
            prop_assert_eq!(s.len(), n.min(distinct.len()));
            for x in &s {
                prop_assert!(corpus.contains(x));
            }
            let clusters: std::collections::HashSet<Profile> = corpus.iter().map(|c| profile(c)).collect();
            if n >= clusters.len() {
                let covered: std::collections::HashSet<Profile> = s.iter().map(|c| profile(c)).collect();
                prop_assert_eq!(covered, clusters);
            }
            prop_assert_eq!(representative_sample(&s, n).unwrap(), s.clone());
            prop_assert_eq!(representative_sample(&corpus, n).unwrap(), s);
        }
    }
}
