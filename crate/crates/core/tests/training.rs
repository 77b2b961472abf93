mod support;

use std::collections::{BTreeMap, HashMap};

use ebl_core::fs::{FeaturePath, RetentionSpec};
use ebl_core::index::{EblIndex, IndexError};
use ebl_core::runtime::{instantiate, lookup, Instantiation};
use ebl_core::segment::{Segmenter, Tagger};
use ebl_core::tagset::TagSequence;
use ebl_core::trainer::{extract_sequences, generalize_parse, macro_spec, max_parses_per_key, select_training};

fn seq(s: &str) -> TagSequence {
    s.parse().unwrap()
}

fn seqs(list: &[&str]) -> Vec<TagSequence> {
    list.iter().map(|s| seq(s)).collect()
}

#[test]
fn ranking_matches_a_brute_count() {
    let res = support::resources();
    let corpus = support::fixture("corpus.txt");
    let (seg, tagger) = (res.segmenter(), res.tagger());

    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for line in corpus.lines() {
        for s in seg.segment(line) {
            let key = tagger.tag(&s.words).to_string();
            if !counts.contains_key(&key) {
                first_seen.push(key.clone());
            }
            *counts.entry(key).or_default() += 1;
        }
    }
    let mut expected: Vec<(String, usize)> = first_seen.iter().map(|k| (k.clone(), counts[k])).collect();
    expected.sort_by_key(|e| std::cmp::Reverse(e.1));

    let got: Vec<(String, usize)> = extract_sequences(corpus.lines(), &seg, &tagger)
        .into_iter()
        .map(|(s, n)| (s.to_string(), n))
        .collect();
    assert_eq!(got, expected);
    assert!(got.len() >= 40);

    let five: Vec<&str> = corpus.lines().take(5).collect();
    let ranked = extract_sequences(five.iter(), &seg, &tagger);
    let total: usize = ranked.iter().map(|r| r.1).sum();
    let brute: usize = five.iter().map(|l| seg.segment(l).len()).sum();
    assert_eq!(total, brute);
}

#[test]
fn index_counts_match_a_recount() {
    let res = support::resources();
    let corpus = support::fixture("corpus.txt");
    let ranked = extract_sequences(corpus.lines(), &res.segmenter(), &res.tagger());
    let training = select_training(&ranked, res.config.trainer.top);
    let out = res.trainer().build_index(&training).unwrap();
    let meta = &out.index.meta;

    // Recount straight from the chart parser and the retention spec.
    let mut parsed = 0;
    let mut per_key: BTreeMap<TagSequence, Vec<_>> = BTreeMap::new();
    for s in &training {
        let trees = res.grammar.parse_tags(&res.tagwords, s);
        if trees.is_empty() {
            continue;
        }
        parsed += 1;
        for t in &trees {
            let gp = generalize_parse(t, &res.tagset, &res.retention, s).unwrap();
            let cap = max_parses_per_key(&gp.key, &res.tagset, &res.config.trainer);
            let list = per_key.entry(gp.key.clone()).or_default();
            let content = (gp.root_fs.to_string(), gp.slot_anchors.clone());
            if !list.contains(&content) && list.len() < cap {
                list.push(content);
            }
        }
    }
    assert_eq!(meta.trained, training.len());
    assert_eq!(meta.parsed, parsed);
    assert_eq!(meta.keys, per_key.len());
    assert_eq!(meta.parses, per_key.values().map(Vec::len).sum::<usize>());
    assert_eq!(out.uncovered.len(), training.len() - parsed);
    assert!(meta.parsed >= 40);
}

#[test]
fn one_unparseable_sequence_is_reported() {
    let res = support::resources();
    let training = seqs(&["determiner noun", "determiner determiner", "pronoun verb_intrans"]);
    let out = res.trainer().build_index(&training).unwrap();
    assert_eq!(out.index.meta.parsed, 2);
    assert_eq!(out.uncovered.len(), 1);
    assert_eq!(out.uncovered[0].rank, 2);
    assert_eq!(out.uncovered[0].sequence, seq("determiner determiner"));
}

#[test]
fn preposition_classes_collapse_into_one_key() {
    let res = support::resources();
    let out = res
        .trainer()
        .build_index(&seqs(&["case_prep determiner noun", "noun_mod_prep determiner noun"]))
        .unwrap();
    let idx = &out.index;
    assert_eq!(idx.meta.keys, 1);
    let stored = idx.get(&seq("preposition determiner noun"));
    assert!((1..=2).contains(&stored.len()));
    assert_eq!(stored[0].slot_tags, seq("case_prep determiner noun"));
    for probe in ["noun_mod_prep determiner noun", "verb_comp_prep determiner noun", "case_prep determiner noun"] {
        let found = lookup(idx, &res.tagset, &seq(probe));
        assert!(!found.is_empty(), "{probe}");
    }
    // The exact slot tags come first.
    let found = lookup(idx, &res.tagset, &seq("case_prep determiner noun"));
    assert_eq!(found[0].slot_tags, seq("case_prep determiner noun"));
}

#[test]
fn generalized_parse_keeps_only_retained_paths() {
    let res = support::resources();
    let s = seq("determiner noun");
    let tree = &res.grammar.parse_tags(&res.tagwords, &s)[0];
    let gp = generalize_parse(tree, &res.tagset, &res.retention, &s).unwrap();
    assert_eq!(gp.key, s);
    assert_eq!(gp.slot_anchors.len(), 2);
    let lifted = macro_spec(&res.retention, 2);
    let is_prefix = |p: &FeaturePath, q: &FeaturePath| q.segments().starts_with(p.segments());
    for (p, n) in gp.root_fs.paths() {
        assert!(lifted.coindex_paths().iter().any(|c| is_prefix(&p, c)), "{p}");
        if matches!(gp.root_fs.node(n), ebl_core::fs::Node::Atom(_)) {
            assert!(lifted.value_paths().contains(&p), "{p}");
        }
    }

    // Retaining every path of the tree changes nothing.
    let all: Vec<FeaturePath> = tree
        .macro_fs
        .paths()
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| p.segments().len() > 1)
        .map(|p| FeaturePath::new(p.segments()[1..].to_vec()))
        .collect();
    let everything = RetentionSpec::new(all.clone(), all).unwrap();
    let full = generalize_parse(tree, &res.tagset, &everything, &s).unwrap();
    assert_eq!(full.root_fs, tree.macro_fs);

    let p = seq("case_prep determiner noun");
    let tree = &res.grammar.parse_tags(&res.tagwords, &p)[0];
    let gp = generalize_parse(tree, &res.tagset, &res.retention, &p).unwrap();
    assert_eq!(gp.key, seq("preposition determiner noun"));
    assert_eq!(gp.slot_tags, p);
}

#[test]
fn stored_parses_are_sound() {
    let res = support::resources();
    let idx = support::trained_index(&res);
    for (key, parses) in idx.entries() {
        assert!(parses.len() <= max_parses_per_key(key, &res.tagset, &res.config.trainer));
        for (i, p) in parses.iter().enumerate() {
            assert_eq!(&p.key, key);
            assert_eq!(&res.tagset.generalize_key(&p.slot_tags), key);
            assert!(parses[..i].iter().all(|q| !q.same_content(p)), "duplicate under {key}");
            let reachable: Vec<usize> = p.root_fs.paths().into_iter().map(|(_, n)| n).collect();
            assert!(p.slot_anchors.iter().all(|a| reachable.contains(a)));

            // Self-applicability with the slot tags' own tag-words.
            let words: Vec<_> = p.slot_tags.tags().iter().map(|t| &res.tagwords.get(t.as_str()).unwrap().fs).collect();
            assert!(matches!(instantiate(p, &words), Ok(Instantiation::Success(_))), "{key}");

            // Provenance: some chart parse of the slot tags prunes to it.
            let trees = res.grammar.parse_tags(&res.tagwords, &p.slot_tags);
            assert!(
                trees.iter().any(|t| &generalize_parse(t, &res.tagset, &res.retention, &p.slot_tags).unwrap() == p),
                "{key} has no chart provenance"
            );
        }
    }
}

#[test]
fn training_is_deterministic_across_pool_sizes() {
    let res = support::resources();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| support::trained_index(&res)).render();
    let b = four.install(|| support::trained_index(&res)).render();
    assert_eq!(a, b);
    assert_eq!(a, support::trained_index(&res).render());
}

#[test]
fn index_files_round_trip_and_guard_their_inputs() {
    let res = support::resources();
    let idx = support::trained_index(&res);
    let text = idx.render();
    assert_eq!(EblIndex::parse(&text).unwrap(), idx);
    assert_eq!(res.load_index(&text).unwrap(), idx);

    let cut = &text[..text.len() / 2];
    let cut = &cut[..cut.rfind('\n').unwrap() + 1];
    assert_eq!(EblIndex::parse(cut).unwrap_err(), IndexError::UnexpectedEnd);
    assert_eq!(IndexError::UnexpectedEnd.to_string(), "unexpected end of index");

    let other = ebl_core::tagset::TagSet::parse("tag noun\nmacro noun [cat:n]\n").unwrap();
    let err = EblIndex::load(&text, &other, &res.retention.fingerprint()).unwrap_err().to_string();
    assert!(err.contains(&idx.meta.tagset_fp) && err.contains(&other.fingerprint()), "{err}");
    let err = EblIndex::load(&text, &res.tagset, "0000000000000000").unwrap_err().to_string();
    assert!(err.contains("retention"), "{err}");
}

#[test]
fn zero_training_gives_an_empty_index() {
    let res = support::resources();
    let out = res.trainer().build_index(&[]).unwrap();
    assert_eq!((out.index.meta.keys, out.index.meta.parses), (0, 0));
    assert_eq!(EblIndex::parse(&out.index.render()).unwrap(), out.index);
}
