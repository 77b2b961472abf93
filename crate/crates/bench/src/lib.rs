//! Fixture loading shared by the benchmarks.

use std::path::{Path, PathBuf};

use ebl_core::index::EblIndex;
use ebl_core::resources::{Resources, Sources};
use ebl_core::segment::{Segment, Segmenter};
use ebl_core::trainer::{extract_sequences, select_training};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The shipped grammar, lexicon, tagset, retention spec and config.
pub fn load_resources() -> Resources {
    let (t, l, g, r, c) = (
        read_fixture("tagset.txt"),
        read_fixture("lexicon.txt"),
        read_fixture("grammar.txt"),
        read_fixture("retention.txt"),
        read_fixture("config.txt"),
    );
    Resources::load(Sources {
        tagset: &t,
        lexicon: &l,
        grammar: &g,
        retention: &r,
        config: Some(&c),
    })
    .expect("fixtures load")
}

/// An index trained on the fixture corpus with the configured `top`.
pub fn train_index(res: &Resources) -> EblIndex {
    let corpus = read_fixture("corpus.txt");
    let ranked = extract_sequences(corpus.lines(), &res.segmenter(), &res.tagger());
    res.trainer()
        .build_index(&select_training(&ranked, res.config.trainer.top))
        .expect("training succeeds")
        .index
}

pub fn bench_segments(res: &Resources) -> Vec<Segment> {
    let seg = res.segmenter();
    read_fixture("bench_segments.txt").lines().flat_map(|l| seg.segment(l)).collect()
}
