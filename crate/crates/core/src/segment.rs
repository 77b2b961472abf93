//! Rule-based segmenter and unigram tagger.
//!
//! Segmentation rules:
//!
//! * tokens are whitespace separated;
//! * leading and trailing punctuation is stripped from each token
//!   (inner apostrophes stay, so `HE'S` is one word);
//! * a token ending in `.`, `!` or `?` closes the current segment;
//! * a configured discourse marker (`okay`, `oh`, ...) always forms a
//!   segment of its own;
//! * commas, dashes and other punctuation never split.

use serde::Serialize;

use crate::lexicon::Lexicon;
use crate::symbol::Symbol;
use crate::tagset::{TagSequence, TagSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// Lower-cased words, never empty.
    pub words: Vec<String>,
    /// Character offsets `[start, end)` into the source line.
    pub span: (usize, usize),
}

impl Segment {
    /// A segment from already tokenized words (span covers the joined text).
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Segment {
        let words: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
        let len = words.iter().map(|w| w.chars().count()).sum::<usize>() + words.len().saturating_sub(1);
        Segment { words, span: (0, len) }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

pub trait Segmenter {
    fn segment(&self, line: &str) -> Vec<Segment>;
}

pub trait Tagger {
    /// One tag per word.
    fn tag(&self, words: &[String]) -> TagSequence;
}

#[derive(Debug, Clone, Default)]
pub struct RuleSegmenter {
    markers: Vec<String>,
}

impl RuleSegmenter {
    pub fn new(markers: impl IntoIterator<Item = impl AsRef<str>>) -> Self {
        RuleSegmenter {
            markers: markers.into_iter().map(|m| m.as_ref().to_lowercase()).collect(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

impl Segmenter for RuleSegmenter {
    fn segment(&self, line: &str) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut words: Vec<String> = Vec::new();
        let mut span = (0, 0);
        fn close(words: &mut Vec<String>, span: (usize, usize), out: &mut Vec<Segment>) {
            if !words.is_empty() {
                out.push(Segment {
                    words: std::mem::take(words),
                    span,
                });
            }
        }

        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            let token = &chars[start..i];
            let lead = token.iter().take_while(|c| !c.is_alphanumeric()).count();
            let trail = token.iter().rev().take_while(|c| !c.is_alphanumeric()).count();
            let final_stop = token[token.len() - trail..]
                .iter()
                .any(|c| matches!(c, '.' | '!' | '?'));
            if lead < token.len() {
                let core = &token[lead..token.len() - trail];
                let word: String = core.iter().filter(|c| is_word_char(**c)).collect::<String>().to_lowercase();
                let (ws, we) = (start + lead, i - trail);
                if self.markers.contains(&word) {
                    close(&mut words, span, &mut out);
                    out.push(Segment {
                        words: vec![word],
                        span: (ws, we),
                    });
                    continue;
                }
                if words.is_empty() {
                    span.0 = ws;
                }
                span.1 = we;
                words.push(word);
            }
            if final_stop {
                close(&mut words, span, &mut out);
            }
        }
        close(&mut words, span, &mut out);
        out
    }
}

/// Dictionary tagger: the tag with the highest unigram count wins, ties
/// go to lexicon order, unknown words get the default tag.
#[derive(Debug, Clone, Copy)]
pub struct UnigramTagger<'a> {
    ts: &'a TagSet,
    lex: &'a Lexicon,
    default_tag: &'a Symbol,
}

impl<'a> UnigramTagger<'a> {
    pub fn new(ts: &'a TagSet, lex: &'a Lexicon, default_tag: &'a Symbol) -> Self {
        UnigramTagger { ts, lex, default_tag }
    }

    pub fn tag_word(&self, word: &str) -> Symbol {
        let mut entries = self.lex.entries_of(word).peekable();
        let Some(first) = entries.next() else {
            return self.default_tag.clone();
        };
        if entries.peek().is_none() {
            return first.tag.clone();
        }
        let mut best: Option<(&Symbol, u64)> = None;
        for e in std::iter::once(first).chain(entries) {
            let n = self.lex.frequency(word, &e.tag);
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((&e.tag, n));
            }
        }
        best.map_or_else(|| self.default_tag.clone(), |(t, _)| t.clone())
    }

    pub fn tagset(&self) -> &TagSet {
        self.ts
    }
}

impl Tagger for UnigramTagger<'_> {
    fn tag(&self, words: &[String]) -> TagSequence {
        TagSequence::new(words.iter().map(|w| self.tag_word(w)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(segs: &[Segment]) -> Vec<String> {
        segs.iter().map(Segment::text).collect()
    }

    #[test]
    fn sentence_final_punctuation_splits() {
        let s = RuleSegmenter::default();
        let segs = s.segment("GOOD GIRL. HE'S GOT THE HEAD.");
        assert_eq!(words(&segs), vec!["good girl", "he's got the head"]);
        assert_eq!(segs[0].span, (0, 9));
        assert_eq!(segs[1].span, (11, 28));
        assert_eq!(words(&s.segment("COME ON, CYNTHIA!")), vec!["come on cynthia"]);
        assert_eq!(words(&s.segment("OKAY.")), vec!["okay"]);
        assert!(s.segment("   ").is_empty());
        assert!(s.segment("").is_empty());
    }

    #[test]
    fn markers_stand_alone() {
        let s = RuleSegmenter::new(["okay"]);
        assert_eq!(
            words(&s.segment("OKAY THE DOG -- SLEEPS")),
            vec!["okay", "the dog sleeps"]
        );
    }

    #[test]
    fn spans_use_character_offsets() {
        let s = RuleSegmenter::default();
        let segs = s.segment("«É» ok.");
        assert_eq!(segs[0].words, vec!["é", "ok"]);
        assert_eq!(segs[0].span, (1, 6));
    }
}
