#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use ebl_core::index::EblIndex;
use ebl_core::resources::{Resources, Sources};
use ebl_core::segment::Segmenter;
use ebl_core::trainer::{extract_sequences, select_training, TrainOutcome};

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn resources() -> Resources {
    let (t, l, g, r, c) = (
        fixture("tagset.txt"),
        fixture("lexicon.txt"),
        fixture("grammar.txt"),
        fixture("retention.txt"),
        fixture("config.txt"),
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

pub fn train(res: &Resources) -> TrainOutcome {
    let corpus = fixture("corpus.txt");
    let ranked = extract_sequences(corpus.lines(), &res.segmenter(), &res.tagger());
    let training = select_training(&ranked, res.config.trainer.top);
    res.trainer().build_index(&training).expect("training succeeds")
}

pub fn trained_index(res: &Resources) -> EblIndex {
    train(res).index
}

pub fn segments(res: &Resources, text: &str) -> Vec<ebl_core::segment::Segment> {
    let seg = res.segmenter();
    text.lines().flat_map(|l| seg.segment(l)).collect()
}
