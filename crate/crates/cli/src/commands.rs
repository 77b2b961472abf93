use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ebl_core::eval::{run_bench, run_coverage, CoverageReport, SegmentRecord, SegmentTiming, TimingReport};
use ebl_core::index::{index_stats, EblIndex, IndexMeta, IndexStats};
use ebl_core::resources::{LoadError, Resources, Sources};
use ebl_core::runtime::Status;
use ebl_core::segment::{Segment, Segmenter};
use ebl_core::trainer::{extract_sequences, select_training, Uncovered};
use serde::Serialize;

use crate::{BenchArgs, Cli, CliError, Command, CoverageArgs, Emit, Outcome, ParseArgs, StatsArgs, TrainArgs};

/// Runs one command, writing results to `out` and warnings to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Train(a) => train(a, out, err),
        Command::Parse(a) => parse(a, out),
        Command::Coverage(a) => coverage(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Stats(a) => stats(a, out),
    }
}

/// One JSON line of `--emit jsonl` output.
#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record<'a> {
    Segment(&'a SegmentRecord),
    Timing(&'a SegmentTiming),
    Coverage(&'a CoverageReport),
    Bench(BenchSummary<'a>),
    Train(&'a TrainReport),
    Stats(&'a StatsReport),
}

/// A bench report without its per-segment rows, which go out as their own
/// `timing` records.
#[derive(Serialize)]
struct BenchSummary<'a> {
    segments: usize,
    warmup: usize,
    iterations: usize,
    chart: &'a ebl_core::eval::TimingSummary,
    ebl: &'a ebl_core::eval::TimingSummary,
    speedup_ratio: f64,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    #[serde(flatten)]
    meta: IndexMeta,
    duplicates: usize,
    capped: usize,
    uncovered: Vec<Uncovered>,
}

impl TrainReport {
    fn render(&self) -> String {
        let m = &self.meta;
        let mut s = format!(
            "trained {}\nparsed {}\nkeys {}\nparses {}\nduplicates dropped {}\ncapped {}\n",
            m.trained, m.parsed, m.keys, m.parses, self.duplicates, self.capped
        );
        if !self.uncovered.is_empty() {
            let _ = writeln!(s, "uncovered {}:", self.uncovered.len());
            for u in &self.uncovered {
                let _ = writeln!(s, "  #{:<4} {}  ({})", u.rank, u.sequence, u.reason);
            }
        }
        s
    }
}

#[derive(Debug, Serialize)]
struct StatsReport {
    trained: usize,
    parsed: usize,
    #[serde(flatten)]
    stats: IndexStats,
}

impl StatsReport {
    fn render(&self) -> String {
        let s = &self.stats;
        format!(
            "trained              {}\nparsed               {}\nkeys                 {}\nparses               {}\n\
             avg parses per key   {:.2}\nkey reduction        {:.2}%\n",
            self.trained,
            self.parsed,
            s.keys,
            s.parses,
            s.avg_parses_per_key,
            s.key_reduction_ratio * 100.0
        )
    }
}

fn emit(out: &mut dyn Write, record: Record<'_>) -> Result<(), CliError> {
    let line = serde_json::to_string(&record).expect("records serialize");
    writeln!(out, "{line}")?;
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(path, format!("cannot read: {e}")))
}

fn load_resources(r: &crate::Resources) -> Result<Resources, CliError> {
    let config = r.config.as_deref().map(read).transpose()?;
    let (tagset, lexicon, grammar, retention) = (read(&r.tagset)?, read(&r.lexicon)?, read(&r.grammar)?, read(&r.retention)?);
    Resources::load(Sources {
        tagset: &tagset,
        lexicon: &lexicon,
        grammar: &grammar,
        retention: &retention,
        config: config.as_deref(),
    })
    .map_err(|e| {
        let path: &PathBuf = match &e {
            LoadError::Diagnostics("tagset", _) => &r.tagset,
            LoadError::Diagnostics("lexicon", _) => &r.lexicon,
            LoadError::Diagnostics("grammar", _) => &r.grammar,
            LoadError::Diagnostics(..) => r.config.as_ref().unwrap_or(&r.tagset),
            LoadError::Retention(_) => &r.retention,
        };
        CliError::config(path, e)
    })
}

fn load_index(res: &Resources, path: &Path) -> Result<EblIndex, CliError> {
    let text = read(path)?;
    res.load_index(&text).map_err(|e| CliError::data(path, e))
}

fn segments(res: &Resources, text: &str) -> Vec<Segment> {
    let seg = res.segmenter();
    text.lines().flat_map(|l| seg.segment(l)).collect()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

fn train(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let res = load_resources(&a.resources)?;
    let corpus = read(&a.corpus)?;
    let top = a.top.unwrap_or(res.config.trainer.top);
    if top == 0 {
        writeln!(err, "warning: --top 0 selects no training sequences; the index will be empty")?;
    }
    let outcome = pool(a.workers)?.install(|| {
        let ranked = extract_sequences(corpus.lines(), &res.segmenter(), &res.tagger());
        res.trainer().build_index(&select_training(&ranked, top))
    });
    let outcome = outcome.map_err(|e| CliError::data(&a.corpus, e))?;
    std::fs::write(&a.out, outcome.index.render()).map_err(|e| CliError::config(&a.out, format!("cannot write: {e}")))?;

    let report = TrainReport {
        meta: outcome.index.meta.clone(),
        duplicates: outcome.duplicates,
        capped: outcome.capped,
        uncovered: outcome.uncovered,
    };
    if let Some(path) = &a.report {
        let mut text = String::new();
        for u in &report.uncovered {
            text += &serde_json::to_string(u).expect("records serialize");
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| CliError::config(path, format!("cannot write: {e}")))?;
    }
    match a.emit {
        Emit::Text => write!(out, "{}", report.render())?,
        Emit::Jsonl => emit(out, Record::Train(&report))?,
    }
    Ok(Outcome::Clean)
}

fn parse(a: ParseArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let res = load_resources(&a.resources)?;
    let idx = load_index(&res, &a.index)?;
    let text = match &a.input {
        Some(path) => read(path)?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::data(Path::new("<stdin>"), e))?;
            s
        }
    };
    let rt = res.runtime(&idx);
    for seg in segments(&res, &text) {
        let r = SegmentRecord::new(&seg, &rt.parse_segment(&seg));
        match a.emit {
            Emit::Text => writeln!(
                out,
                "{}\t{}\t{}\tdeletions={:?}\t{}",
                r.segment,
                r.status.as_str(),
                r.tags,
                r.used_deletions,
                r.fs.as_deref().unwrap_or("-")
            )?,
            Emit::Jsonl => emit(out, Record::Segment(&r))?,
        }
    }
    Ok(Outcome::Clean)
}

fn coverage(a: CoverageArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let res = load_resources(&a.resources)?;
    let idx = load_index(&res, &a.index)?;
    let segs = segments(&res, &read(&a.test)?);
    let rt = res.runtime(&idx);
    let (report, records) = pool(a.workers)?.install(|| run_coverage(&rt, &segs, None));
    match a.emit {
        Emit::Text => write!(out, "{}", report.render())?,
        Emit::Jsonl => {
            for r in &records {
                emit(out, Record::Segment(r))?;
            }
            emit(out, Record::Coverage(&report))?;
        }
    }
    let missed = records.iter().any(|r| r.status != Status::Instantiated);
    Ok(if missed { Outcome::WithMisses } else { Outcome::Clean })
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let res = load_resources(&a.resources)?;
    let idx = load_index(&res, &a.index)?;
    let segs = segments(&res, &read(&a.test)?);
    let rt = res.runtime(&idx);
    let iterations = a.iterations as usize;
    let report: TimingReport = pool(a.workers)?.install(|| run_bench(&rt, &res.grammar, &segs, a.warmup, iterations, a.workers != 1));
    match a.emit {
        Emit::Text => write!(out, "{}", report.render())?,
        Emit::Jsonl => {
            for t in &report.per_segment {
                emit(out, Record::Timing(t))?;
            }
            emit(
                out,
                Record::Bench(BenchSummary {
                    segments: report.segments,
                    warmup: report.warmup,
                    iterations: report.iterations,
                    chart: &report.chart,
                    ebl: &report.ebl,
                    speedup_ratio: report.speedup_ratio,
                }),
            )?;
        }
    }
    let missed = report.per_segment.iter().any(|t| t.ebl_status != Status::Instantiated);
    Ok(if missed { Outcome::WithMisses } else { Outcome::Clean })
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let text = read(&a.index)?;
    let idx = EblIndex::parse(&text).map_err(|e| CliError::data(&a.index, e))?;
    let report = StatsReport {
        trained: idx.meta.trained,
        parsed: idx.meta.parsed,
        stats: index_stats(&idx),
    };
    match a.emit {
        Emit::Text => write!(out, "{}", report.render())?,
        Emit::Jsonl => emit(out, Record::Stats(&report))?,
    }
    Ok(Outcome::Clean)
}
