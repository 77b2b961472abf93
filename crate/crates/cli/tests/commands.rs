use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use ebl_core::index::EblIndex;
use ebl_core::resources::{Resources, Sources};
use ebl_core::trainer::{extract_sequences, select_training};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn resource_flags() -> Vec<String> {
    let mut v = Vec::new();
    for name in ["tagset", "lexicon", "grammar", "retention", "config"] {
        v.push(format!("--{name}"));
        v.push(fixture(&format!("{name}.txt")).display().to_string());
    }
    v
}

fn ebl(args: &[&str], stdin: &str) -> Output {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_ebl"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn with_resources<'a>(args: &[&'a str], flags: &'a [String]) -> Vec<&'a str> {
    args.iter().copied().chain(flags.iter().map(String::as_str)).collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn train_into(dir: &Path, top: &str) -> (PathBuf, Output) {
    let flags = resource_flags();
    let out = dir.join("index.ebl");
    let (corpus, out_s) = (fixture("corpus.txt"), out.display().to_string());
    let args = with_resources(
        &["train", "--corpus", corpus.to_str().unwrap(), "--top", top, "--out", &out_s, "--emit", "jsonl"],
        &flags,
    );
    let o = ebl(&args, "");
    (out, o)
}

fn load_fixture_resources() -> Resources {
    let read = |n: &str| std::fs::read_to_string(fixture(n)).unwrap();
    let (t, l, g, r, c) = (read("tagset.txt"), read("lexicon.txt"), read("grammar.txt"), read("retention.txt"), read("config.txt"));
    Resources::load(Sources {
        tagset: &t,
        lexicon: &l,
        grammar: &g,
        retention: &r,
        config: Some(&c),
    })
    .unwrap()
}

#[test]
fn train_report_matches_a_recount() {
    let dir = tempfile::tempdir().unwrap();
    let (path, o) = train_into(dir.path(), "50");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(report["kind"], "train");

    let res = load_fixture_resources();
    let corpus = std::fs::read_to_string(fixture("corpus.txt")).unwrap();
    let ranked = extract_sequences(corpus.lines(), &res.segmenter(), &res.tagger());
    let training = select_training(&ranked, 50);
    let parsed = training.iter().filter(|s| !res.grammar.parse_tags(&res.tagwords, s).is_empty()).count();
    assert_eq!(report["trained"], 50);
    assert_eq!(report["parsed"], parsed);
    assert_eq!(report["uncovered"].as_array().unwrap().len(), 50 - parsed);

    let idx = EblIndex::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["keys"], idx.entries().len());
    assert_eq!(report["parses"], idx.parses().count());
}

#[test]
fn top_zero_warns_and_writes_an_empty_index() {
    let dir = tempfile::tempdir().unwrap();
    let (path, o) = train_into(dir.path(), "0");
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    let idx = EblIndex::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!((idx.meta.keys, idx.meta.parses), (0, 0));
}

#[test]
fn missing_file_is_a_usage_fault_naming_the_path() {
    let flags = resource_flags();
    let mut args = with_resources(&["stats"], &[]);
    args.extend(["--index", "/no/such/index.ebl"]);
    let o = ebl(&args, "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/index.ebl"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.ebl");
    let mut args: Vec<&str> = vec!["train", "--corpus", "/no/corpus.txt", "--out", out.to_str().unwrap()];
    let broken: Vec<String> = flags.iter().map(|f| if f.ends_with("grammar.txt") { "/no/grammar.txt".into() } else { f.clone() }).collect();
    args.extend(broken.iter().map(String::as_str));
    let o = ebl(&args, "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/grammar.txt"), "{}", stderr(&o));
}

#[test]
fn bad_index_is_a_data_fault() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ebl");
    std::fs::write(&path, "eblindex-version 1\ntagset-fp x\n").unwrap();
    let o = ebl(&["stats", "--index", path.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unexpected end"), "{}", stderr(&o));
}

#[test]
fn zero_iterations_is_rejected() {
    let flags = resource_flags();
    let args = with_resources(&["bench", "--index", "i", "--test", "t", "--iterations", "0"], &flags);
    assert_eq!(ebl(&args, "").status.code(), Some(2));
}

#[test]
fn parse_reads_standard_input() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = train_into(dir.path(), "50");
    let flags = resource_flags();
    let args = with_resources(&["parse", "--index", path.to_str().unwrap()], &flags);

    let o = ebl(&args, "OKAY.\n");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let cols: Vec<&str> = text.trim_end().split('\t').collect();
    assert_eq!(&cols[..3], ["okay", "instantiated", "interjection"]);

    let o = ebl(&args, "");
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn coverage_text_and_jsonl_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = train_into(dir.path(), "50");
    let flags = resource_flags();
    let test = fixture("coverage_test.txt");
    let base = ["coverage", "--index", path.to_str().unwrap(), "--test", test.to_str().unwrap()];

    let text = ebl(&with_resources(&base, &flags), "");
    // Misses present, run still completes.
    assert_eq!(text.status.code(), Some(1));
    let text = stdout(&text);
    assert!(text.contains("80.0%") && text.contains("8/10"), "{text}");
    assert!(text.contains("87.5%") && text.contains("7/8"), "{text}");

    let mut args = base.to_vec();
    args.extend(["--emit", "jsonl"]);
    let lines: Vec<serde_json::Value> =
        stdout(&ebl(&with_resources(&args, &flags), "")).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let report = lines.last().unwrap();
    assert_eq!(report["kind"], "coverage");
    assert_eq!(report["pos_sequence_found"], serde_json::json!({"count": 8, "of": 10}));
    assert_eq!(report["parse_found_given_sequence"], serde_json::json!({"count": 7, "of": 8}));
    assert!(report["third_stage_given_parse"].is_null());
    assert_eq!(lines.iter().filter(|l| l["kind"] == "segment").count(), 12);
}
