//! The persistent key → macro-parse index.
//!
//! ```text
//! eblindex-version 1
//! tagset-fp 0123456789abcdef
//! retention-fp fedcba9876543210
//! counts <trained> <parsed> <keys> <parses>
//! key preposition determiner noun
//! parse slots=case_prep determiner noun anchors=5 9 12 fs=[...]
//! ```
//!
//! Keys appear in sorted order, parses in storage order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::fs::parse_fs;
use crate::tagset::{TagSequence, TagSet};
use crate::trainer::GeneralizedParse;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexMeta {
    pub tagset_fp: String,
    pub retention_fp: String,
    /// Training sequences attempted.
    pub trained: usize,
    /// Training sequences with at least one parse.
    pub parsed: usize,
    pub keys: usize,
    pub parses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EblIndex {
    pub meta: IndexMeta,
    entries: BTreeMap<TagSequence, Vec<GeneralizedParse>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("unsupported index version `{0}` (expected {FORMAT_VERSION})")]
    Version(String),
    #[error("unexpected end of index")]
    UnexpectedEnd,
    #[error("index line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("index was built for tagset {found}, but the loaded tagset is {expected}")]
    TagsetMismatch { found: String, expected: String },
    #[error("index was built for retention spec {found}, but the loaded spec is {expected}")]
    RetentionMismatch { found: String, expected: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexStats {
    pub keys: usize,
    pub parses: usize,
    pub avg_parses_per_key: f64,
    pub key_reduction_ratio: f64,
}

/// Arithmetic over the index counts: reduction is `1 - keys / parsed`.
pub fn index_stats(idx: &EblIndex) -> IndexStats {
    let m = &idx.meta;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    IndexStats {
        keys: m.keys,
        parses: m.parses,
        avg_parses_per_key: ratio(m.parses, m.keys),
        key_reduction_ratio: if m.parsed == 0 { 0.0 } else { 1.0 - ratio(m.keys, m.parsed) },
    }
}

impl EblIndex {
    pub fn new(meta: IndexMeta) -> EblIndex {
        EblIndex {
            meta,
            entries: BTreeMap::new(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<TagSequence, Vec<GeneralizedParse>> {
        &self.entries
    }

    pub fn get(&self, key: &TagSequence) -> &[GeneralizedParse] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn parses(&self) -> impl Iterator<Item = &GeneralizedParse> {
        self.entries.values().flatten()
    }

    pub(crate) fn entry(&mut self, key: TagSequence) -> &mut Vec<GeneralizedParse> {
        self.entries.entry(key).or_default()
    }

    /// Drops empty keys and recomputes `keys`/`parses` from the entries.
    pub(crate) fn refresh_counts(&mut self) {
        self.entries.retain(|_, v| !v.is_empty());
        self.meta.keys = self.entries.len();
        self.meta.parses = self.entries.values().map(Vec::len).sum();
    }

    pub fn render(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let _ = writeln!(out, "eblindex-version {FORMAT_VERSION}");
        let _ = writeln!(out, "tagset-fp {}", m.tagset_fp);
        let _ = writeln!(out, "retention-fp {}", m.retention_fp);
        let _ = writeln!(out, "counts {} {} {} {}", m.trained, m.parsed, m.keys, m.parses);
        for (key, parses) in &self.entries {
            let _ = writeln!(out, "key {key}");
            for p in parses {
                let anchors: Vec<String> = p.slot_anchors.iter().map(|a| a.to_string()).collect();
                let _ = writeln!(
                    out,
                    "parse slots={} anchors={} fs={}",
                    p.slot_tags,
                    anchors.join(" "),
                    p.root_fs
                );
            }
        }
        out
    }

    /// Reads an index without checking it against any tagset.
    pub fn parse(text: &str) -> Result<EblIndex, IndexError> {
        if !text.is_empty() && !text.ends_with('\n') {
            return Err(IndexError::UnexpectedEnd);
        }
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |name: &str| -> Result<(usize, String), IndexError> {
            let (n, line) = lines.next().ok_or(IndexError::UnexpectedEnd)?;
            match line.strip_prefix(name).and_then(|r| r.strip_prefix(' ')) {
                Some(v) => Ok((n, v.trim().to_string())),
                None => Err(IndexError::Malformed {
                    line: n,
                    message: format!("expected `{name}`"),
                }),
            }
        };
        let (_, version) = header("eblindex-version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(IndexError::Version(version));
        }
        let (_, tagset_fp) = header("tagset-fp")?;
        let (_, retention_fp) = header("retention-fp")?;
        let (n, counts) = header("counts")?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .ok()
            .filter(|c: &Vec<usize>| c.len() == 4)
            .ok_or(IndexError::Malformed {
                line: n,
                message: "expected four counts".into(),
            })?;
        let meta = IndexMeta {
            tagset_fp,
            retention_fp,
            trained: counts[0],
            parsed: counts[1],
            keys: counts[2],
            parses: counts[3],
        };

        let mut entries: BTreeMap<TagSequence, Vec<GeneralizedParse>> = BTreeMap::new();
        let mut current: Option<TagSequence> = None;
        let mut stored = 0;
        for (n, line) in lines {
            let bad = |message: String| IndexError::Malformed { line: n, message };
            if let Some(rest) = line.strip_prefix("key ") {
                let key: TagSequence = rest.parse().map_err(|_| bad("empty key".into()))?;
                if entries.contains_key(&key) {
                    return Err(bad(format!("key `{key}` repeated")));
                }
                entries.insert(key.clone(), Vec::new());
                current = Some(key);
            } else if let Some(rest) = line.strip_prefix("parse ") {
                let key = current.clone().ok_or_else(|| bad("parse before any key".into()))?;
                let gp = parse_entry(rest, key).map_err(bad)?;
                entries.get_mut(&gp.key).unwrap().push(gp);
                stored += 1;
            } else {
                return Err(bad(format!("unexpected line `{line}`")));
            }
        }
        if entries.len() < meta.keys || stored < meta.parses {
            return Err(IndexError::UnexpectedEnd);
        }
        if entries.len() != meta.keys || stored != meta.parses {
            return Err(IndexError::Malformed {
                line: n,
                message: format!(
                    "counts say {} keys and {} parses, file holds {} and {stored}",
                    meta.keys,
                    meta.parses,
                    entries.len()
                ),
            });
        }
        Ok(EblIndex { meta, entries })
    }

    /// Reads an index and checks it against the loaded tagset and
    /// retention fingerprints.
    pub fn load(text: &str, ts: &TagSet, retention_fp: &str) -> Result<EblIndex, IndexError> {
        let idx = EblIndex::parse(text)?;
        let expected = ts.fingerprint();
        if idx.meta.tagset_fp != expected {
            return Err(IndexError::TagsetMismatch {
                found: idx.meta.tagset_fp,
                expected,
            });
        }
        if idx.meta.retention_fp != retention_fp {
            return Err(IndexError::RetentionMismatch {
                found: idx.meta.retention_fp,
                expected: retention_fp.to_string(),
            });
        }
        for (key, parses) in &idx.entries {
            for p in parses {
                if let Some(t) = ts.undeclared(&p.slot_tags) {
                    return Err(IndexError::Malformed {
                        line: 0,
                        message: format!("key `{key}` stores undeclared tag `{t}`"),
                    });
                }
                if &ts.generalize_key(&p.slot_tags) != key {
                    return Err(IndexError::Malformed {
                        line: 0,
                        message: format!("slots `{}` do not generalize to key `{key}`", p.slot_tags),
                    });
                }
            }
        }
        Ok(idx)
    }
}

fn parse_entry(rest: &str, key: TagSequence) -> Result<GeneralizedParse, String> {
    let rest = rest.strip_prefix("slots=").ok_or("expected `slots=`")?;
    let (slots, rest) = rest.split_once(" anchors=").ok_or("expected `anchors=`")?;
    let (anchors, fs) = rest.split_once(" fs=").ok_or("expected `fs=`")?;
    let slot_tags: TagSequence = slots.parse().map_err(|_| "empty slot list".to_string())?;
    let slot_anchors: Vec<usize> = anchors
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad anchor: {e}"))?;
    let root_fs = parse_fs(fs).map_err(|e| e.to_string())?;
    if slot_tags.len() != key.len() || slot_anchors.len() != key.len() {
        return Err(format!("entry arity does not match key `{key}`"));
    }
    if let Some(a) = slot_anchors.iter().find(|&&a| a >= root_fs.len()) {
        return Err(format!("anchor {a} outside a {}-node structure", root_fs.len()));
    }
    if root_fs.child(0, "mother").is_none() {
        return Err("stored structure has no mother".into());
    }
    Ok(GeneralizedParse {
        key,
        slot_tags,
        root_fs,
        slot_anchors,
    })
}
