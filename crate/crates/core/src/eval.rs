//! Coverage cascade and parser timing comparison.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::Grammar;
use crate::fs::{render, FeatureStructure};
use crate::runtime::{ParseResult, Runtime, Status};
use crate::segment::{Segment, Tagger};

/// `count` out of `of`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub count: usize,
    pub of: usize,
}

impl Ratio {
    pub fn new(count: usize, of: usize) -> Ratio {
        assert!(count <= of, "{count} out of {of}");
        Ratio { count, of }
    }

    /// `None` when the denominator is zero.
    pub fn value(self) -> Option<f64> {
        (self.of > 0).then(|| self.count as f64 / self.of as f64)
    }
}

/// Product of a chain of conditional rates.
pub fn chained(conditionals: &[f64]) -> f64 {
    conditionals.iter().product()
}

/// Stand-in for a downstream stage judging an instantiated parse.
pub type ThirdStage<'a> = dyn Fn(&Segment, &FeatureStructure) -> bool + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub total_multiword_segments: usize,
    pub single_word_segments: usize,
    pub pos_sequence_found: Ratio,
    pub parse_found_given_sequence: Ratio,
    pub third_stage_given_parse: Option<Ratio>,
    pub overall_third_stage: Option<f64>,
    /// Multi-word misses rescued by the deletion fallback.
    pub recovered_by_deletion: Ratio,
    pub single_word_instantiated: Ratio,
}

impl CoverageReport {
    pub fn from_counts(
        total: usize,
        found: usize,
        parsed: usize,
        third: Option<usize>,
        recovered: usize,
        single: Ratio,
    ) -> CoverageReport {
        let pos = Ratio::new(found, total);
        let parse = Ratio::new(parsed, found);
        let third = third.map(|t| Ratio::new(t, parsed));
        let overall = third.and_then(|t| Some(chained(&[pos.value()?, parse.value()?, t.value()?])));
        CoverageReport {
            total_multiword_segments: total,
            single_word_segments: single.of,
            pos_sequence_found: pos,
            parse_found_given_sequence: parse,
            third_stage_given_parse: third,
            overall_third_stage: overall,
            recovered_by_deletion: Ratio::new(recovered, total - found),
            single_word_instantiated: single,
        }
    }

    /// Table rendering: one row per stage of the cascade.
    pub fn render(&self) -> String {
        let pct = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{:.1}%", v * 100.0));
        let row = |label: &str, r: Option<Ratio>| -> String {
            match r {
                Some(r) => format!("{label:<48} {:>6} {:>9}\n", pct(r.value()), format!("{}/{}", r.count, r.of)),
                None => format!("{label:<48} {:>6}\n", "n/a"),
            }
        };
        let mut out = format!(
            "Coverage over {} multi-word segments ({} single-word segments reported separately)\n",
            self.total_multiword_segments, self.single_word_segments
        );
        out += &row("POS sequence found (overall)", Some(self.pos_sequence_found));
        out += &row("Parse found (when sequence already found)", Some(self.parse_found_given_sequence));
        out += &row("Third stage found (when parse already found)", self.third_stage_given_parse);
        let _ = writeln!(out, "{:<48} {:>6}", "Overall third stage", pct(self.overall_third_stage));
        out += &row("Recovered by deletion (when sequence not found)", Some(self.recovered_by_deletion));
        out += &row("Single-word segments instantiated", Some(self.single_word_instantiated));
        out
    }
}

/// Machine-readable outcome of one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentRecord {
    pub segment: String,
    pub tags: String,
    pub status: Status,
    pub key_found: bool,
    pub used_deletions: Vec<usize>,
    pub attempts: usize,
    pub fs: Option<String>,
}

impl SegmentRecord {
    pub fn new(seg: &Segment, r: &ParseResult) -> SegmentRecord {
        SegmentRecord {
            segment: seg.text(),
            tags: r.tags.to_string(),
            status: r.status,
            key_found: r.key_found,
            used_deletions: r.used_deletions.clone(),
            attempts: r.attempts,
            fs: r.fs.as_ref().map(render),
        }
    }
}

/// Parses every segment (in parallel, order kept) and tallies the cascade.
pub fn run_coverage(
    rt: &Runtime<'_>,
    segments: &[Segment],
    third: Option<&ThirdStage<'_>>,
) -> (CoverageReport, Vec<SegmentRecord>) {
    let results: Vec<ParseResult> = segments.par_iter().map(|s| rt.parse_segment(s)).collect();
    let (mut total, mut found, mut parsed, mut passed, mut recovered) = (0, 0, 0, 0, 0);
    let (mut singles, mut single_ok) = (0, 0);
    for (seg, r) in segments.iter().zip(&results) {
        if seg.len() < 2 {
            singles += 1;
            single_ok += usize::from(r.status == Status::Instantiated);
            continue;
        }
        total += 1;
        if !r.key_found {
            recovered += usize::from(r.status == Status::Instantiated);
            continue;
        }
        found += 1;
        if let Some(fs) = &r.fs {
            parsed += 1;
            if third.is_some_and(|t| t(seg, fs)) {
                passed += 1;
            }
        }
    }
    let report = CoverageReport::from_counts(
        total,
        found,
        parsed,
        third.map(|_| passed),
        recovered,
        Ratio::new(single_ok, singles),
    );
    let records = segments.iter().zip(&results).map(|(s, r)| SegmentRecord::new(s, r)).collect();
    (report, records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingSummary {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

impl TimingSummary {
    /// Nearest-rank percentiles; zeros for an empty sample.
    pub fn of(samples: &[f64]) -> TimingSummary {
        if samples.is_empty() {
            return TimingSummary {
                mean_ms: 0.0,
                median_ms: 0.0,
                p95_ms: 0.0,
            };
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        TimingSummary {
            mean_ms: s.iter().sum::<f64>() / s.len() as f64,
            median_ms: rank(0.5),
            p95_ms: rank(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentTiming {
    pub segment: String,
    pub chart_ms: f64,
    pub ebl_ms: f64,
    pub chart_parses: usize,
    pub ebl_status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub segments: usize,
    pub warmup: usize,
    pub iterations: usize,
    pub chart: TimingSummary,
    pub ebl: TimingSummary,
    /// Chart mean over EBL mean.
    pub speedup_ratio: f64,
    pub per_segment: Vec<SegmentTiming>,
}

impl TimingReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "Average time per segment over {} segments ({} iterations, {} warmup)\n",
            self.segments, self.iterations, self.warmup
        );
        let _ = writeln!(out, "{:<14} {:>12} {:>12} {:>12}", "parser", "mean ms", "median ms", "p95 ms");
        for (name, t) in [("Chart parser", self.chart), ("EBL parser", self.ebl)] {
            let _ = writeln!(
                out,
                "{name:<14} {:>12.4} {:>12.4} {:>12.4}",
                t.mean_ms, t.median_ms, t.p95_ms
            );
        }
        let _ = writeln!(out, "speedup {:.1}x", self.speedup_ratio);
        out
    }
}

/// Full chart parse of a segment under the tagger's tags, with every
/// homograph of the assigned tag as an alternative leaf.
pub fn chart_parse_segment(rt: &Runtime<'_>, grammar: &Grammar, seg: &Segment) -> usize {
    let tags = rt.tagger().tag(&seg.words);
    let lattice: Vec<Vec<FeatureStructure>> = rt
        .entries_for(&seg.words, &tags)
        .into_iter()
        .map(|alts| alts.into_iter().cloned().collect())
        .collect();
    grammar.parse_lattice(&lattice).len()
}

/// Times both parsers on identical segments. Each segment's time is the
/// mean over `iterations` runs after `warmup` untimed passes over the set.
pub fn run_bench(
    rt: &Runtime<'_>,
    grammar: &Grammar,
    segments: &[Segment],
    warmup: usize,
    iterations: usize,
    parallel: bool,
) -> TimingReport {
    assert!(iterations > 0, "iterations must be positive");
    for _ in 0..warmup {
        for s in segments {
            std::hint::black_box(chart_parse_segment(rt, grammar, s));
            std::hint::black_box(rt.parse_segment(s));
        }
    }
    let time_one = |s: &Segment| {
        let t = Instant::now();
        let mut chart_parses = 0;
        for _ in 0..iterations {
            chart_parses = std::hint::black_box(chart_parse_segment(rt, grammar, s));
        }
        let chart_ms = t.elapsed().as_secs_f64() * 1e3 / iterations as f64;
        let t = Instant::now();
        let mut status = Status::LookupMiss;
        for _ in 0..iterations {
            status = std::hint::black_box(rt.parse_segment(s)).status;
        }
        let ebl_ms = t.elapsed().as_secs_f64() * 1e3 / iterations as f64;
        SegmentTiming {
            segment: s.text(),
            chart_ms,
            ebl_ms,
            chart_parses,
            ebl_status: status,
        }
    };
    let per_segment: Vec<SegmentTiming> = if parallel {
        segments.par_iter().map(time_one).collect()
    } else {
        segments.iter().map(time_one).collect()
    };
    let chart = TimingSummary::of(&per_segment.iter().map(|t| t.chart_ms).collect::<Vec<_>>());
    let ebl = TimingSummary::of(&per_segment.iter().map(|t| t.ebl_ms).collect::<Vec<_>>());
    TimingReport {
        segments: segments.len(),
        warmup,
        iterations,
        chart,
        ebl,
        speedup_ratio: if ebl.mean_ms > 0.0 { chart.mean_ms / ebl.mean_ms } else { 0.0 },
        per_segment,
    }
}
