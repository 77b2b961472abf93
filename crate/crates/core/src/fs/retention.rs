use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::symbol::Symbol;

use super::FeaturePath;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetentionError {
    #[error("retention spec declares no {0} paths")]
    Empty(&'static str),
    #[error("value path {0} is not also a coindex path")]
    ValueNotCoindexed(FeaturePath),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub(crate) struct TrieNode {
    pub(crate) children: Vec<(Symbol, usize)>,
    pub(crate) keep_value: bool,
}

/// Which parts of a structure survive [`restrict`](super::restrict).
///
/// Arcs survive when they lie on a prefix of some coindex path. Nodes keep
/// their identity, so sharing between retained paths is preserved. Atomic
/// values survive only on value paths, which must be a subset of the
/// coindex paths.
#[derive(Debug, Clone)]
pub struct RetentionSpec {
    coindex: BTreeSet<FeaturePath>,
    value: BTreeSet<FeaturePath>,
    trie: Vec<TrieNode>,
}

impl PartialEq for RetentionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.coindex == other.coindex && self.value == other.value
    }
}

impl Eq for RetentionSpec {}

impl RetentionSpec {
    pub fn new(
        coindex: impl IntoIterator<Item = FeaturePath>,
        value: impl IntoIterator<Item = FeaturePath>,
    ) -> Result<Self, RetentionError> {
        let coindex: BTreeSet<_> = coindex.into_iter().collect();
        let value: BTreeSet<_> = value.into_iter().collect();
        if coindex.is_empty() {
            return Err(RetentionError::Empty("coindex"));
        }
        if value.is_empty() {
            return Err(RetentionError::Empty("value"));
        }
        if let Some(p) = value.iter().find(|p| !coindex.contains(*p)) {
            return Err(RetentionError::ValueNotCoindexed(p.clone()));
        }
        let trie = build_trie(&coindex, &value);
        Ok(RetentionSpec { coindex, value, trie })
    }

    /// Reads `coindex <path>` / `value <path>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, RetentionError> {
        let mut coindex = Vec::new();
        let mut value = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| RetentionError::Syntax { line: i + 1, message };
            let mut words = line.split_whitespace();
            let kind = words.next().unwrap_or_default();
            let (Some(path), None) = (words.next(), words.next()) else {
                return Err(syntax(format!("expected `{kind} <path>`")));
            };
            let path: FeaturePath = path.parse().map_err(|e| syntax(format!("{e}")))?;
            match kind {
                "coindex" => coindex.push(path),
                "value" => value.push(path),
                other => return Err(syntax(format!("unknown directive `{other}`"))),
            }
        }
        RetentionSpec::new(coindex, value)
    }

    pub fn coindex_paths(&self) -> &BTreeSet<FeaturePath> {
        &self.coindex
    }

    pub fn value_paths(&self) -> &BTreeSet<FeaturePath> {
        &self.value
    }

    pub(crate) fn trie(&self) -> &[TrieNode] {
        &self.trie
    }

    /// The same spec applied independently beneath each of `labels`.
    pub fn under_each(&self, labels: &[Symbol]) -> RetentionSpec {
        let lift = |set: &BTreeSet<FeaturePath>| -> BTreeSet<FeaturePath> {
            labels
                .iter()
                .flat_map(|l| set.iter().map(move |p| p.under(l)))
                .collect()
        };
        let coindex = lift(&self.coindex);
        let value = lift(&self.value);
        let trie = build_trie(&coindex, &value);
        RetentionSpec { coindex, value, trie }
    }

    /// Canonical text form; [`RetentionSpec::parse`] reads it back.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.coindex {
            let _ = writeln!(out, "coindex {p}");
        }
        for p in &self.value {
            let _ = writeln!(out, "value {p}");
        }
        out
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(&self.render())
    }
}

fn build_trie(coindex: &BTreeSet<FeaturePath>, value: &BTreeSet<FeaturePath>) -> Vec<TrieNode> {
    let mut trie = vec![TrieNode {
        children: Vec::new(),
        keep_value: false,
    }];
    let mut insert = |path: &FeaturePath, keep_value: bool| {
        let mut t = 0;
        for seg in path.segments() {
            t = match trie[t].children.iter().find(|(f, _)| f == seg) {
                Some(&(_, c)) => c,
                None => {
                    let c = trie.len();
                    trie.push(TrieNode {
                        children: Vec::new(),
                        keep_value: false,
                    });
                    trie[t].children.push((seg.clone(), c));
                    c
                }
            };
        }
        trie[t].keep_value |= keep_value;
    };
    for p in coindex {
        insert(p, false);
    }
    for p in value {
        insert(p, true);
    }
    trie
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(ps: &[&str]) -> Vec<FeaturePath> {
        ps.iter().map(|p| p.parse().unwrap()).collect()
    }

    #[test]
    fn empty_specs_are_rejected() {
        assert_eq!(
            RetentionSpec::new(vec![], vec![]).unwrap_err(),
            RetentionError::Empty("coindex")
        );
        assert_eq!(
            RetentionSpec::new(paths(&["a"]), vec![]).unwrap_err(),
            RetentionError::Empty("value")
        );
    }

    #[test]
    fn value_paths_must_be_coindexed() {
        let e = RetentionSpec::new(paths(&["a"]), paths(&["b"])).unwrap_err();
        assert_eq!(e, RetentionError::ValueNotCoindexed("b".parse().unwrap()));
    }

    #[test]
    fn parse_render_round_trip() {
        let spec = RetentionSpec::parse("# c\ncoindex a.b\ncoindex c\nvalue c\n").unwrap();
        assert_eq!(spec.coindex_paths().len(), 2);
        assert_eq!(RetentionSpec::parse(&spec.render()).unwrap(), spec);
        assert_eq!(spec.fingerprint().len(), 16);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let e = RetentionSpec::parse("coindex a\n\nkeep b\n").unwrap_err();
        assert!(matches!(e, RetentionError::Syntax { line: 3, .. }));
    }

    #[test]
    fn under_each_lifts_paths() {
        let spec = RetentionSpec::new(paths(&["a"]), paths(&["a"])).unwrap();
        let lifted = spec.under_each(&["m".into(), "s0".into()]);
        let got: Vec<String> = lifted.coindex_paths().iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["m.a", "s0.a"]);
    }
}
