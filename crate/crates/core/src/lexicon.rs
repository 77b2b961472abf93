//! Word lexicon built by macro expansion, plus the derived tag-word entries.
//!
//! ```text
//! word run tag=verb_comp fs=[cform:pp]
//! freq okay interjection 40
//! ```

use rustc_hash::FxHashMap as HashMap;

use crate::diag::{content_lines, Diagnostics};
use crate::fs::{generalize, parse_fs, unify, FeatureStructure};
use crate::symbol::Symbol;
use crate::tagset::TagSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    /// Lower-cased surface form.
    pub form: String,
    pub tag: Symbol,
    pub fs: FeatureStructure,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    by_form: HashMap<String, Vec<usize>>,
    freq: HashMap<String, Vec<(Symbol, u64)>>,
}

impl Lexicon {
    pub fn parse(text: &str, ts: &TagSet) -> Result<Lexicon, Diagnostics> {
        let mut diags = Diagnostics::default();
        let mut lex = Lexicon::default();
        for (line, content) in content_lines(text) {
            let (directive, rest) = content
                .split_once(char::is_whitespace)
                .map_or((content, ""), |(d, r)| (d, r.trim()));
            match directive {
                "word" => match parse_word(rest, ts, line, content.len() - rest.len()) {
                    Ok(e) => lex.push(e),
                    Err(m) => diags.push(line, m),
                },
                "freq" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let [word, tag, count] = parts[..] else {
                        diags.push(line, "expected `freq <word> <tag> <count>`");
                        continue;
                    };
                    let Some(tag) = ts.symbol(tag) else {
                        diags.push(line, format!("unknown tag `{tag}`"));
                        continue;
                    };
                    match count.parse::<u64>() {
                        Ok(n) => {
                            let counts = lex.freq.entry(word.to_lowercase()).or_default();
                            counts.retain(|(t, _)| t != tag);
                            counts.push((tag.clone(), n));
                        }
                        Err(_) => diags.push(line, format!("bad count `{count}`")),
                    }
                }
                other => diags.push(line, format!("unknown directive `{other}`")),
            }
        }
        diags.into_result(lex)
    }

    /// Builds a lexicon from ready-made entries (frequencies empty).
    pub fn from_entries(entries: impl IntoIterator<Item = LexicalEntry>) -> Lexicon {
        let mut lex = Lexicon::default();
        for e in entries {
            lex.push(e);
        }
        lex
    }

    fn push(&mut self, mut e: LexicalEntry) {
        e.form = e.form.to_lowercase();
        self.by_form.entry(e.form.clone()).or_default().push(self.entries.len());
        self.entries.push(e);
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    /// All entries for `form` (case-insensitive), in file order.
    pub fn lookup_word(&self, form: &str) -> Vec<&LexicalEntry> {
        self.entries_of(form).collect()
    }

    /// Iterator form of [`Lexicon::lookup_word`].
    pub fn entries_of<'a>(&'a self, form: &str) -> impl Iterator<Item = &'a LexicalEntry> + 'a {
        self.by_form
            .get(lower(form).as_ref())
            .map_or(&[][..], Vec::as_slice)
            .iter()
            .map(|&i| &self.entries[i])
    }

    /// Unigram count for a word/tag pair; 0 when not listed.
    pub fn frequency(&self, form: &str, tag: &Symbol) -> u64 {
        self.freq
            .get(lower(form).as_ref())
            .and_then(|c| c.iter().find(|(t, _)| t == tag))
            .map_or(0, |(_, n)| *n)
    }

    /// Distinct forms in first-appearance order.
    pub fn forms(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.form.as_str()))
            .map(|e| e.form.as_str())
            .collect()
    }

    pub fn entries_with_tag<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a LexicalEntry> + 'a {
        self.entries.iter().filter(move |e| e.tag.as_str() == tag)
    }
}

fn lower(form: &str) -> std::borrow::Cow<'_, str> {
    if form.chars().any(char::is_uppercase) {
        form.to_lowercase().into()
    } else {
        form.into()
    }
}

fn parse_word(rest: &str, ts: &TagSet, line: usize, rest_col: usize) -> Result<LexicalEntry, String> {
    let mut words = rest.splitn(3, char::is_whitespace);
    let form = words.next().filter(|f| !f.is_empty()).ok_or("`word` needs a form")?;
    let tag = words
        .next()
        .and_then(|t| t.strip_prefix("tag="))
        .ok_or_else(|| format!("word `{form}`: expected `tag=<tag>`"))?;
    let tag = ts
        .symbol(tag)
        .ok_or_else(|| format!("word `{form}`: unknown tag `{tag}`"))?
        .clone();
    let template = ts.macro_for(tag.as_str()).expect("declared tags have macros");
    let fs = match words.next().map(str::trim) {
        None | Some("") => template.clone(),
        Some(extra) => {
            let avm = extra
                .strip_prefix("fs=")
                .ok_or_else(|| format!("word `{form}`: expected `fs=<AVM>`, found `{extra}`"))?;
            let col = rest_col + 1 + (rest.len() - avm.len());
            let overrides = parse_fs(avm).map_err(|e| format!("word `{form}`: {}", e.offset(line, col)))?;
            unify(template, &overrides)
                .ok_or_else(|| format!("word `{form}`: overrides clash with the `{tag}` macro"))?
        }
    };
    Ok(LexicalEntry {
        form: form.to_string(),
        tag,
        fs,
    })
}

/// Entry for the pseudo-word standing for every word bearing `tag`: the
/// generalization of all such entries, or the macro when there are none.
pub fn tagword_entry(ts: &TagSet, lex: &Lexicon, tag: &str) -> Option<FeatureStructure> {
    lex.entries_with_tag(tag)
        .map(|e| e.fs.clone())
        .reduce(|acc, fs| generalize(&acc, &fs))
        .or_else(|| ts.macro_for(tag).cloned())
}

/// Tag-word entries for every declared tag, computed once.
#[derive(Debug, Clone)]
pub struct TagwordTable {
    entries: HashMap<Symbol, LexicalEntry>,
}

impl TagwordTable {
    pub fn new(ts: &TagSet, lex: &Lexicon) -> TagwordTable {
        let entries = ts
            .tags()
            .iter()
            .map(|t| {
                let fs = tagword_entry(ts, lex, t.name.as_str()).expect("declared tags have macros");
                let e = LexicalEntry {
                    form: format!("<{}>", t.name),
                    tag: t.name.clone(),
                    fs,
                };
                (t.name.clone(), e)
            })
            .collect();
        TagwordTable { entries }
    }

    pub fn get(&self, tag: &str) -> Option<&LexicalEntry> {
        self.entries.get(tag)
    }
}
