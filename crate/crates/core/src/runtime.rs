//! Run-time parsing: tag, look up the key, unify the words into a stored
//! macro parse, and fall back to deleting modifiers on a miss.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use itertools::Itertools;
use serde::Serialize;

use crate::config::RuntimeConfig;
use crate::fs::{with_scratch, FeatureStructure, Store};
use crate::index::EblIndex;
use crate::lexicon::{Lexicon, TagwordTable};
use crate::segment::{Segment, Tagger, UnigramTagger};
use crate::symbol::Symbol;
use crate::tagset::{TagSequence, TagSet};
use crate::trainer::GeneralizedParse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Instantiated,
    LookupMiss,
    UnifyFail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Instantiated => "instantiated",
            Status::LookupMiss => "lookup_miss",
            Status::UnifyFail => "unify_fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    pub status: Status,
    /// Instantiated mother; present iff the status is `Instantiated`.
    pub fs: Option<FeatureStructure>,
    /// Positions dropped to reach a stored key (only for `Instantiated`).
    pub used_deletions: Vec<usize>,
    /// Instantiation attempts over all candidates and entry combinations.
    pub attempts: usize,
    /// Tags assigned to the full segment.
    pub tags: TagSequence,
    /// Whether the undeleted tag sequence had stored parses.
    pub key_found: bool,
    /// For the successful attempt, the lexical alternative chosen at each
    /// kept position (see [`Runtime::leaves`]).
    pub choices: Vec<usize>,
    /// True if the fallback search stopped on the time budget.
    pub timed_out: bool,
}

/// Candidate parses for `seq`: the entries under its generalized key whose
/// slot tags fit `seq`, exact slot-tag matches first, index order otherwise.
pub fn lookup<'a>(idx: &'a EblIndex, ts: &TagSet, seq: &TagSequence) -> Vec<&'a GeneralizedParse> {
    let key = ts.generalize_key(seq);
    let fits = |gp: &&GeneralizedParse| {
        gp.slot_tags
            .tags()
            .iter()
            .zip(seq.tags())
            .all(|(s, t)| s == t || ts.generalize_tag(s) == ts.generalize_tag(t))
    };
    let (exact, rest): (Vec<_>, Vec<_>) = idx
        .get(&key)
        .iter()
        .filter(fits)
        .partition(|gp| &gp.slot_tags == seq);
    exact.into_iter().chain(rest).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{entries} entries for a {slots}-slot parse")]
pub struct ArityMismatch {
    pub slots: usize,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instantiation {
    /// The instantiated mother.
    Success(FeatureStructure),
    Failed { position: usize },
}

/// Unifies each entry into its slot, left to right, on a working copy.
pub fn instantiate(gp: &GeneralizedParse, entries: &[&FeatureStructure]) -> Result<Instantiation, ArityMismatch> {
    instantiate_in(&mut Store::new(), gp, entries)
}

fn instantiate_in(
    store: &mut Store,
    gp: &GeneralizedParse,
    entries: &[&FeatureStructure],
) -> Result<Instantiation, ArityMismatch> {
    if entries.len() != gp.slot_anchors.len() {
        return Err(ArityMismatch {
            slots: gp.slot_anchors.len(),
            entries: entries.len(),
        });
    }
    store.clear();
    let base = store.load(&gp.root_fs);
    for (position, (fs, &anchor)) in entries.iter().zip(&gp.slot_anchors).enumerate() {
        let h = store.load(fs);
        if !store.unify(base + anchor, h) {
            return Ok(Instantiation::Failed { position });
        }
    }
    let mother = store.child(base, "mother").expect("macro structures carry a mother");
    Ok(match store.extract(mother) {
        Ok(fs) => Instantiation::Success(fs),
        Err(_) => Instantiation::Failed {
            position: entries.len() - 1,
        },
    })
}

/// Sequences reachable by deleting 1..=`max_deletions` deletable positions,
/// fewest deletions first, then leftmost; never empty, never repeated.
pub fn deletion_candidates(ts: &TagSet, seq: &TagSequence, max_deletions: usize) -> Vec<(TagSequence, Vec<usize>)> {
    let deletable: Vec<usize> = (0..seq.len())
        .filter(|&i| ts.is_deletable(seq.tags()[i].as_str()))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for k in 1..=max_deletions.min(deletable.len()) {
        for combo in deletable.iter().copied().combinations(k) {
            if let Some(rest) = seq.without(&combo) {
                if seen.insert(rest.clone()) {
                    out.push((rest, combo));
                }
            }
        }
    }
    out
}

/// Everything needed to parse segments against one loaded index.
pub struct Runtime<'a> {
    pub index: &'a EblIndex,
    pub tagset: &'a TagSet,
    pub lexicon: &'a Lexicon,
    pub tagwords: &'a TagwordTable,
    pub default_tag: &'a Symbol,
    pub config: RuntimeConfig,
}

enum Search {
    Miss,
    Fail,
    Found(FeatureStructure, Vec<usize>),
}

impl Runtime<'_> {
    pub fn tagger(&self) -> UnigramTagger<'_> {
        UnigramTagger::new(self.tagset, self.lexicon, self.default_tag)
    }

    /// Lexical alternatives per position under the assigned tags. Words the
    /// lexicon lacks get the tag-word entry of their tag.
    pub fn entries_for<'s>(&'s self, words: &[String], tags: &TagSequence) -> Vec<Vec<&'s FeatureStructure>> {
        words
            .iter()
            .zip(tags.tags())
            .map(|(w, t)| {
                let mine: Vec<&FeatureStructure> = self
                    .lexicon
                    .entries_of(w)
                    .filter(|e| &e.tag == t)
                    .map(|e| &e.fs)
                    .collect();
                if mine.is_empty() {
                    vec![&self.tagwords.get(t.as_str()).expect("tags are declared").fs]
                } else {
                    mine
                }
            })
            .collect()
    }

    /// Leaf structures behind an instantiated result, one per kept position.
    pub fn leaves(&self, seg: &Segment, r: &ParseResult) -> Vec<FeatureStructure> {
        self.entries_for(&seg.words, &r.tags)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !r.used_deletions.contains(i))
            .zip(&r.choices)
            .map(|((_, alts), &c)| alts[c].clone())
            .collect()
    }

    pub fn parse_segment(&self, seg: &Segment) -> ParseResult {
        let started = Instant::now();
        let tags = self.tagger().tag(&seg.words);
        let alternatives = self.entries_for(&seg.words, &tags);
        with_scratch(|store| self.parse_tagged(tags, &alternatives, store, started))
    }

    fn parse_tagged(
        &self,
        tags: TagSequence,
        alternatives: &[Vec<&FeatureStructure>],
        store: &mut Store,
        started: Instant,
    ) -> ParseResult {
        let mut attempts = 0;
        let first = self.search(&tags, alternatives, store, &mut attempts);
        let mut out = ParseResult {
            status: Status::LookupMiss,
            fs: None,
            used_deletions: Vec::new(),
            attempts: 0,
            tags,
            key_found: false,
            choices: Vec::new(),
            timed_out: false,
        };
        match first {
            Search::Found(fs, choices) => {
                out.key_found = true;
                out.status = Status::Instantiated;
                out.fs = Some(fs);
                out.choices = choices;
            }
            Search::Fail => {
                out.key_found = true;
                out.status = Status::UnifyFail;
            }
            Search::Miss => self.fall_back(&mut out, alternatives, store, &mut attempts, started),
        }
        out.attempts = attempts;
        out
    }

    /// Retries a missed sequence with deletable positions removed.
    fn fall_back(
        &self,
        out: &mut ParseResult,
        alternatives: &[Vec<&FeatureStructure>],
        store: &mut Store,
        attempts: &mut usize,
        started: Instant,
    ) {
        let budget = (self.config.time_budget_ms > 0).then(|| Duration::from_millis(self.config.time_budget_ms));
        for (seq, deleted) in deletion_candidates(self.tagset, &out.tags, self.config.max_deletions) {
            if budget.is_some_and(|b| started.elapsed() > b) {
                out.status = Status::LookupMiss;
                out.timed_out = true;
                return;
            }
            let kept: Vec<Vec<&FeatureStructure>> = alternatives
                .iter()
                .enumerate()
                .filter(|(i, _)| !deleted.contains(i))
                .map(|(_, a)| a.clone())
                .collect();
            match self.search(&seq, &kept, store, attempts) {
                Search::Found(fs, choices) => {
                    out.status = Status::Instantiated;
                    out.fs = Some(fs);
                    out.choices = choices;
                    out.used_deletions = deleted;
                    return;
                }
                Search::Fail => out.status = Status::UnifyFail,
                Search::Miss => {}
            }
        }
    }

    fn search(
        &self,
        seq: &TagSequence,
        alternatives: &[Vec<&FeatureStructure>],
        store: &mut Store,
        attempts: &mut usize,
    ) -> Search {
        let candidates = lookup(self.index, self.tagset, seq);
        if candidates.is_empty() {
            return Search::Miss;
        }
        for gp in candidates {
            if alternatives.iter().all(|a| a.len() == 1) {
                let only: Vec<&FeatureStructure> = alternatives.iter().map(|a| a[0]).collect();
                *attempts += 1;
                if let Ok(Instantiation::Success(fs)) = instantiate_in(store, gp, &only) {
                    return Search::Found(fs, vec![0; only.len()]);
                }
                continue;
            }
            for choice in alternatives.iter().map(|a| 0..a.len()).multi_cartesian_product() {
                *attempts += 1;
                let entries: Vec<&FeatureStructure> =
                    choice.iter().zip(alternatives).map(|(&c, a)| a[c]).collect();
                if let Ok(Instantiation::Success(fs)) = instantiate_in(store, gp, &entries) {
                    return Search::Found(fs, choice);
                }
            }
        }
        Search::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagset() -> TagSet {
        TagSet::parse(
            "tag adv deletable\ntag det\ntag adj deletable\ntag noun\nmacro adv []\nmacro det []\nmacro adj []\nmacro noun []\n",
        )
        .unwrap()
    }

    fn render(c: &[(TagSequence, Vec<usize>)]) -> Vec<String> {
        c.iter().map(|(s, d)| format!("{s} {d:?}")).collect()
    }

    #[test]
    fn deletion_order() {
        let ts = tagset();
        let c = deletion_candidates(&ts, &"det adj noun".parse().unwrap(), 1);
        assert_eq!(render(&c), vec!["det noun [1]"]);
        let c = deletion_candidates(&ts, &"adv det adj noun".parse().unwrap(), 2);
        assert_eq!(
            render(&c),
            vec!["det adj noun [0]", "adv det noun [2]", "det noun [0, 2]"]
        );
        assert!(deletion_candidates(&ts, &"det noun".parse().unwrap(), 2).is_empty());
        // Only deletable material: never delete everything.
        let c = deletion_candidates(&ts, &"adj adj".parse().unwrap(), 2);
        assert_eq!(render(&c), vec!["adj [0]"]);
    }

    #[test]
    fn instantiate_checks_arity_and_reports_position() {
        let gp = GeneralizedParse {
            key: "a b".parse().unwrap(),
            slot_tags: "a b".parse().unwrap(),
            root_fs: "[mother:[x:#1, y:#2], slot0:[v:#1], slot1:[v:#2]]".parse().unwrap(),
            slot_anchors: vec![4, 5],
        };
        assert_eq!(gp.root_fs.subgraph(4).to_string(), "[v:[]]");
        let a: FeatureStructure = "[v:p]".parse().unwrap();
        let b: FeatureStructure = "[v:q, w:r]".parse().unwrap();
        let Instantiation::Success(m) = instantiate(&gp, &[&a, &b]).unwrap() else {
            panic!("should instantiate")
        };
        assert_eq!(m.to_string(), "[x:p, y:q]");
        let clash: FeatureStructure = "[v:[z:z]]".parse().unwrap();
        assert_eq!(
            instantiate(&gp, &[&a, &clash]).unwrap(),
            Instantiation::Success("[x:p, y:[z:z]]".parse().unwrap())
        );
        let atom_clash: FeatureStructure = "q".parse().unwrap();
        assert_eq!(
            instantiate(&gp, &[&atom_clash, &b]).unwrap(),
            Instantiation::Failed { position: 0 }
        );
        assert_eq!(
            instantiate(&gp, &[&a]).unwrap_err(),
            ArityMismatch { slots: 2, entries: 1 }
        );
    }
}
