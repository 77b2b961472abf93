//! Index construction: rank corpus tag sequences, parse the most frequent
//! ones as tag-word strings and store pruned whole-tree macro parses.

use std::io::{self, BufRead};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{slot_label, Grammar, ParseTree};
use crate::config::TrainerConfig;
use crate::fs::{restrict_mapped, FeatureStructure, NodeId, RetentionSpec};
use crate::index::{EblIndex, IndexMeta};
use crate::lexicon::TagwordTable;
use crate::segment::{Segmenter, Tagger};
use crate::symbol::Symbol;
use crate::tagset::{TagSequence, TagSet};

/// A stored macro parse.
///
/// `root_fs` is the pruned macro structure `[mother: M, slot0: L0, ...]`;
/// the mother is what instantiation returns, and `slot_anchors[i]` is the
/// node where the word at position `i` is unified in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedParse {
    pub key: TagSequence,
    pub slot_tags: TagSequence,
    pub root_fs: FeatureStructure,
    pub slot_anchors: Vec<NodeId>,
}

impl GeneralizedParse {
    pub fn mother(&self) -> FeatureStructure {
        self.root_fs
            .subgraph(self.root_fs.child(0, "mother").expect("macro structures carry a mother"))
    }

    /// Same stored content, ignoring which specific tags produced it.
    pub fn same_content(&self, other: &GeneralizedParse) -> bool {
        self.root_fs == other.root_fs && self.slot_anchors == other.slot_anchors
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("corpus line {line}: {source}")]
    Corpus { line: usize, source: io::Error },
    #[error("slot {position} of `{seq}` lost its anchor under the retention spec")]
    PrunedAnchor { seq: TagSequence, position: usize },
}

/// Distinct tag sequences over all segments, most frequent first; ties keep
/// first-occurrence order.
pub fn extract_sequences<I, S>(lines: I, segmenter: &dyn Segmenter, tagger: &dyn Tagger) -> Vec<(TagSequence, usize)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: IndexMap<TagSequence, usize> = IndexMap::new();
    for line in lines {
        for seg in segmenter.segment(line.as_ref()) {
            *counts.entry(tagger.tag(&seg.words)).or_default() += 1;
        }
    }
    rank(counts)
}

/// [`extract_sequences`] over a reader; I/O failures carry the line number.
pub fn extract_sequences_from(
    reader: impl BufRead,
    segmenter: &dyn Segmenter,
    tagger: &dyn Tagger,
) -> Result<Vec<(TagSequence, usize)>, TrainError> {
    let mut counts: IndexMap<TagSequence, usize> = IndexMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TrainError::Corpus { line: i + 1, source })?;
        for seg in segmenter.segment(&line) {
            *counts.entry(tagger.tag(&seg.words)).or_default() += 1;
        }
    }
    Ok(rank(counts))
}

fn rank(counts: IndexMap<TagSequence, usize>) -> Vec<(TagSequence, usize)> {
    let mut ranked: Vec<_> = counts.into_iter().collect();
    ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
    ranked
}

pub fn select_training(ranked: &[(TagSequence, usize)], n: usize) -> Vec<TagSequence> {
    ranked.iter().take(n).map(|(s, _)| s.clone()).collect()
}

/// Prunes one tag-word parse of `seq` for storage.
pub fn generalize_parse(
    tree: &ParseTree,
    ts: &TagSet,
    spec: &RetentionSpec,
    seq: &TagSequence,
) -> Result<GeneralizedParse, TrainError> {
    let lifted = macro_spec(spec, seq.len());
    generalize_with(tree, ts, &lifted, seq)
}

/// `spec` applied to the mother and to every slot of an `n`-word macro.
pub fn macro_spec(spec: &RetentionSpec, n: usize) -> RetentionSpec {
    let mut labels = vec![Symbol::from("mother")];
    labels.extend((0..n).map(slot_label));
    spec.under_each(&labels)
}

fn generalize_with(
    tree: &ParseTree,
    ts: &TagSet,
    lifted: &RetentionSpec,
    seq: &TagSequence,
) -> Result<GeneralizedParse, TrainError> {
    let (root_fs, map) = restrict_mapped(&tree.macro_fs, lifted);
    let slot_anchors = tree
        .slot_anchors
        .iter()
        .enumerate()
        .map(|(position, &a)| {
            map[a].ok_or_else(|| TrainError::PrunedAnchor {
                seq: seq.clone(),
                position,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneralizedParse {
        key: ts.generalize_key(seq),
        slot_tags: seq.clone(),
        root_fs,
        slot_anchors,
    })
}

/// Storage bound for one key: `base + per_generalizable * g`, where `g`
/// counts positions whose tag has declared subclasses.
pub fn max_parses_per_key(key: &TagSequence, ts: &TagSet, cfg: &TrainerConfig) -> usize {
    let g = key.tags().iter().filter(|t| ts.has_subclasses(t.as_str())).count();
    cfg.cap_base + cfg.cap_per_generalizable * g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Uncovered {
    pub rank: usize,
    pub sequence: TagSequence,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub index: EblIndex,
    pub uncovered: Vec<Uncovered>,
    /// Parses dropped as duplicates of one already stored under the key.
    pub duplicates: usize,
    /// Parses dropped because the key was full.
    pub capped: usize,
}

pub struct Trainer<'a> {
    pub grammar: &'a Grammar,
    pub tagset: &'a TagSet,
    pub tagwords: &'a TagwordTable,
    pub retention: &'a RetentionSpec,
    pub config: TrainerConfig,
}

impl Trainer<'_> {
    /// Parses every training sequence (in parallel on the current rayon
    /// pool) and merges the results in rank order.
    pub fn build_index(&self, training: &[TagSequence]) -> Result<TrainOutcome, TrainError> {
        let results: Vec<Result<Vec<GeneralizedParse>, String>> = training
            .par_iter()
            .map(|seq| self.train_one(seq))
            .collect::<Result<_, _>>()?;

        let mut index = EblIndex::new(IndexMeta {
            tagset_fp: self.tagset.fingerprint(),
            retention_fp: self.retention.fingerprint(),
            trained: training.len(),
            ..IndexMeta::default()
        });
        let mut uncovered = Vec::new();
        let (mut duplicates, mut capped) = (0, 0);
        for (rank, (seq, result)) in training.iter().zip(results).enumerate() {
            let parses = match result {
                Ok(p) => p,
                Err(reason) => {
                    uncovered.push(Uncovered {
                        rank: rank + 1,
                        sequence: seq.clone(),
                        reason,
                    });
                    continue;
                }
            };
            index.meta.parsed += 1;
            for gp in parses {
                let cap = max_parses_per_key(&gp.key, self.tagset, &self.config);
                let list = index.entry(gp.key.clone());
                if list.iter().any(|p| p.same_content(&gp)) {
                    duplicates += 1;
                } else if list.len() >= cap {
                    capped += 1;
                } else {
                    list.push(gp);
                }
            }
        }
        index.refresh_counts();
        Ok(TrainOutcome {
            index,
            uncovered,
            duplicates,
            capped,
        })
    }

    /// `Ok(Err(reason))` marks an uncovered sequence.
    fn train_one(&self, seq: &TagSequence) -> Result<Result<Vec<GeneralizedParse>, String>, TrainError> {
        if let Some(t) = self.tagset.undeclared(seq) {
            return Ok(Err(format!("undeclared tag `{t}`")));
        }
        let trees = self.grammar.parse_tags(self.tagwords, seq);
        if trees.is_empty() {
            return Ok(Err("no parse".to_string()));
        }
        let lifted = macro_spec(self.retention, seq.len());
        let parses = trees
            .iter()
            .map(|t| generalize_with(t, self.tagset, &lifted, seq))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ok(parses))
    }
}
