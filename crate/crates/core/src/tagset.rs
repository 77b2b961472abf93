//! Tag inventory, key generalization and tag macros.
//!
//! File format (line oriented, `#` comments):
//!
//! ```text
//! features cat num index ...          # optional vocabulary declaration
//! tag case_prep super=preposition     # generalizes to `preposition` in keys
//! tag adjective deletable             # may be dropped by the runtime fallback
//! macro case_prep [cat:p, ptype:case]
//! ```

use std::collections::hash_map::Entry;
use std::collections::BTreeSet;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::diag::{content_lines, Diagnostics};
use crate::fs::{parse_fs, render, FeatureStructure};
use crate::symbol::{is_atom_text, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub name: Symbol,
    pub superclass: Option<Symbol>,
    pub deletable: bool,
}

#[derive(Debug, Clone)]
pub struct TagSet {
    tags: Vec<Tag>,
    index: HashMap<Symbol, usize>,
    macros: Vec<FeatureStructure>,
    vocabulary: BTreeSet<Symbol>,
    with_subclasses: HashSet<Symbol>,
}

/// Ordered, non-empty list of tag names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TagSequence(Vec<Symbol>);

impl TagSequence {
    /// Panics on an empty list.
    pub fn new(tags: Vec<Symbol>) -> Self {
        assert!(!tags.is_empty(), "tag sequences are never empty");
        TagSequence(tags)
    }

    pub fn tags(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The sequence with the given (sorted, in-range) positions removed,
    /// or `None` if nothing would remain.
    pub fn without(&self, positions: &[usize]) -> Option<TagSequence> {
        let rest: Vec<Symbol> = self
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        (!rest.is_empty()).then_some(TagSequence(rest))
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("empty tag sequence")]
pub struct EmptySequence;

impl FromStr for TagSequence {
    type Err = EmptySequence;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tags: Vec<Symbol> = s.split_whitespace().map(Symbol::from).collect();
        if tags.is_empty() {
            return Err(EmptySequence);
        }
        Ok(TagSequence(tags))
    }
}

impl TagSet {
    pub fn parse(text: &str) -> Result<TagSet, Diagnostics> {
        let mut diags = Diagnostics::default();
        let mut tags: Vec<(usize, Tag)> = Vec::new();
        let mut index = HashMap::default();
        let mut macro_src: HashMap<Symbol, (usize, FeatureStructure)> = HashMap::default();
        let mut vocabulary = BTreeSet::new();
        let mut declared_vocabulary = false;

        for (line, content) in content_lines(text) {
            let (directive, rest) = content
                .split_once(char::is_whitespace)
                .map_or((content, ""), |(d, r)| (d, r.trim()));
            match directive {
                "features" => {
                    declared_vocabulary = true;
                    for f in rest.split_whitespace() {
                        if is_atom_text(f) {
                            vocabulary.insert(Symbol::from(f));
                        } else {
                            diags.push(line, format!("invalid feature name `{f}`"));
                        }
                    }
                }
                "tag" => {
                    let mut words = rest.split_whitespace();
                    let Some(name) = words.next() else {
                        diags.push(line, "`tag` needs a name");
                        continue;
                    };
                    if !is_atom_text(name) {
                        diags.push(line, format!("invalid tag name `{name}`"));
                        continue;
                    }
                    let mut tag = Tag {
                        name: Symbol::from(name),
                        superclass: None,
                        deletable: false,
                    };
                    for w in words {
                        if w == "deletable" {
                            tag.deletable = true;
                        } else if let Some(s) = w.strip_prefix("super=") {
                            if is_atom_text(s) {
                                tag.superclass = Some(Symbol::from(s));
                            } else {
                                diags.push(line, format!("invalid superclass `{s}` for tag `{name}`"));
                            }
                        } else {
                            diags.push(line, format!("unknown attribute `{w}` for tag `{name}`"));
                        }
                    }
                    if index.contains_key(&tag.name) {
                        diags.push(line, format!("duplicate tag `{name}`"));
                        continue;
                    }
                    index.insert(tag.name.clone(), tags.len());
                    tags.push((line, tag));
                }
                "macro" => {
                    let Some((name, avm)) = rest.split_once(char::is_whitespace) else {
                        diags.push(line, "`macro` needs a tag name and an AVM");
                        continue;
                    };
                    let name = Symbol::from(name);
                    let col = content.len() - avm.trim_start().len() + 1;
                    match parse_fs(avm) {
                        Ok(fs) => {
                            if let Entry::Vacant(slot) = macro_src.entry(name.clone()) {
                                slot.insert((line, fs));
                            } else {
                                diags.push(line, format!("duplicate macro for `{name}`"));
                            }
                        }
                        Err(e) => diags.push(
                            line,
                            format!("macro `{name}`: {}", e.offset(line, col)),
                        ),
                    }
                }
                other => diags.push(line, format!("unknown directive `{other}`")),
            }
        }

        if tags.is_empty() && diags.is_empty() {
            diags.push(0, "no tags declared");
            return Err(diags);
        }

        for (line, tag) in &tags {
            let Some(sup) = &tag.superclass else { continue };
            match index.get(sup) {
                None => diags.push(
                    *line,
                    format!("tag `{}` names unknown superclass `{sup}`", tag.name),
                ),
                Some(&i) if tags[i].1.superclass.is_some() => diags.push(
                    *line,
                    format!(
                        "tag `{}`: superclass `{sup}` has its own superclass; chains must have depth 1",
                        tag.name
                    ),
                ),
                Some(&i) if tags[i].1.name == tag.name => {
                    diags.push(*line, format!("tag `{}` is its own superclass", tag.name))
                }
                Some(_) => {}
            }
        }

        let mut by_line: Vec<_> = macro_src.iter().collect();
        by_line.sort_by_key(|(_, (l, _))| *l);
        for (name, (line, fs)) in by_line {
            if !index.contains_key(name) {
                diags.push(*line, format!("macro for undeclared tag `{name}`"));
            }
            if declared_vocabulary {
                let unknown: BTreeSet<&Symbol> = fs.features().filter(|f| !vocabulary.contains(*f)).collect();
                for f in unknown {
                    diags.push(*line, format!("macro `{name}` uses undeclared feature `{f}`"));
                }
            }
        }

        let mut macros = Vec::with_capacity(tags.len());
        for (line, tag) in &tags {
            match macro_src.get(&tag.name) {
                Some((_, fs)) => macros.push(fs.clone()),
                None => {
                    diags.push(*line, format!("tag `{}` has no macro", tag.name));
                    macros.push(FeatureStructure::top());
                }
            }
        }

        if !declared_vocabulary {
            vocabulary = macros.iter().flat_map(|m| m.features().cloned()).collect();
        }
        let with_subclasses = tags.iter().filter_map(|(_, t)| t.superclass.clone()).collect();
        diags.into_result(TagSet {
            tags: tags.into_iter().map(|(_, t)| t).collect(),
            index,
            macros,
            vocabulary,
            with_subclasses,
        })
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag(&self, name: &str) -> Option<&Tag> {
        self.index.get(name).map(|&i| &self.tags[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// The declared symbol for `name`, if any.
    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.tag(name).map(|t| &t.name)
    }

    pub fn macro_for(&self, name: &str) -> Option<&FeatureStructure> {
        self.index.get(name).map(|&i| &self.macros[i])
    }

    pub fn feature_vocabulary(&self) -> &BTreeSet<Symbol> {
        &self.vocabulary
    }

    /// The key class a tag is stored under: its superclass, else itself.
    pub fn generalize_tag(&self, tag: &Symbol) -> Symbol {
        match self.tag(tag.as_str()).and_then(|t| t.superclass.as_ref()) {
            Some(s) => s.clone(),
            None => tag.clone(),
        }
    }

    pub fn generalize_key(&self, seq: &TagSequence) -> TagSequence {
        TagSequence(seq.0.iter().map(|t| self.generalize_tag(t)).collect())
    }

    /// True if some declared tag names `tag` as its superclass.
    pub fn has_subclasses(&self, tag: &str) -> bool {
        self.with_subclasses.contains(tag)
    }

    pub fn subclasses<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Tag> + 'a {
        self.tags
            .iter()
            .filter(move |t| t.superclass.as_ref().is_some_and(|s| s.as_str() == key))
    }

    pub fn is_deletable(&self, tag: &str) -> bool {
        self.tag(tag).is_some_and(|t| t.deletable)
    }

    /// First undeclared tag in `seq`, if any.
    pub fn undeclared<'a>(&self, seq: &'a TagSequence) -> Option<&'a Symbol> {
        seq.0.iter().find(|t| !self.contains(t.as_str()))
    }

    /// Canonical text; [`TagSet::parse`] reads it back.
    pub fn render(&self) -> String {
        let mut out = String::from("features");
        for f in &self.vocabulary {
            out.push(' ');
            out.push_str(f.as_str());
        }
        out.push('\n');
        for t in &self.tags {
            let _ = write!(out, "tag {}", t.name);
            if let Some(s) = &t.superclass {
                let _ = write!(out, " super={s}");
            }
            if t.deletable {
                out.push_str(" deletable");
            }
            out.push('\n');
        }
        for (t, m) in self.tags.iter().zip(&self.macros) {
            let _ = writeln!(out, "macro {} {}", t.name, render(m));
        }
        out
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
tag noun
tag preposition
tag case_prep super=preposition
tag adjective deletable
macro noun [cat:n]
macro preposition [cat:p]
macro case_prep [cat:p, ptype:case]
macro adjective [cat:adj]
";

    #[test]
    fn generalization_follows_superclass() {
        let ts = TagSet::parse(SMALL).unwrap();
        assert_eq!(ts.generalize_tag(&"case_prep".into()), "preposition");
        assert_eq!(ts.generalize_tag(&"noun".into()), "noun");
        let key = ts.generalize_key(&"case_prep noun".parse().unwrap());
        assert_eq!(key.to_string(), "preposition noun");
        assert!(ts.has_subclasses("preposition"));
        assert!(!ts.has_subclasses("case_prep"));
        assert!(ts.is_deletable("adjective"));
        assert!(!ts.is_deletable("noun"));
    }

    #[test]
    fn empty_file_is_rejected() {
        let e = TagSet::parse("# nothing here\n").unwrap_err();
        assert_eq!(e.to_string(), "no tags declared");
    }

    #[test]
    fn all_problems_are_reported() {
        let e = TagSet::parse(
            "tag a super=ghost\ntag a\ntag b super=c\ntag c super=d\ntag d\nmacro a [x:y\nmacro e [x:y]\n",
        )
        .unwrap_err();
        let text = e.to_string();
        assert!(text.contains("line 1: tag `a` names unknown superclass `ghost`"), "{text}");
        assert!(text.contains("line 2: duplicate tag `a`"), "{text}");
        assert!(text.contains("line 3: tag `b`: superclass `c` has its own superclass"), "{text}");
        assert!(text.contains("line 6: macro `a`: line 6"), "{text}");
        assert!(text.contains("line 7: macro for undeclared tag `e`"), "{text}");
        assert!(text.contains("tag `d` has no macro"), "{text}");
    }

    #[test]
    fn vocabulary_is_enforced_when_declared() {
        let e = TagSet::parse("features cat\ntag n\nmacro n [cat:n, num:sg]\n").unwrap_err();
        assert!(e.to_string().contains("undeclared feature `num`"));
        let ts = TagSet::parse("tag n\nmacro n [cat:n, num:sg]\n").unwrap();
        assert_eq!(ts.feature_vocabulary().len(), 2);
    }

    #[test]
    fn render_round_trips_and_fingerprints() {
        let ts = TagSet::parse(SMALL).unwrap();
        let again = TagSet::parse(&ts.render()).unwrap();
        assert_eq!(again.render(), ts.render());
        assert_eq!(again.fingerprint(), ts.fingerprint());
        let other = TagSet::parse(&SMALL.replace("ptype:case", "ptype:x")).unwrap();
        assert_ne!(other.fingerprint(), ts.fingerprint());
    }

    #[test]
    fn sequence_deletion() {
        let s: TagSequence = "a b c".parse().unwrap();
        assert_eq!(s.without(&[1]).unwrap().to_string(), "a c");
        assert_eq!("x".parse::<TagSequence>().unwrap().without(&[0]), None);
        assert!("  ".parse::<TagSequence>().is_err());
    }
}
