//! Bottom-up unification chart parser over unary and binary rules.
//!
//! Grammar file:
//!
//! ```text
//! start [frag:yes]
//! rule np_det -> [cat:np, index:#1] := [cat:det] [cat:nbar, index:#1]
//! ```
//!
//! Tags are shared between the mother and the daughters of one rule.
//!
//! Cells are filled by increasing span length, then by start position.
//! Inside a cell, binary rules run first in declaration order (split point,
//! then left edge, then right edge vary within a rule), followed by a unary
//! closure in declaration order. A complete parse is a rule application
//! over the whole input whose mother unifies with the start constraint; a
//! bare leaf never counts. Complete parses come out in cell order.

use std::collections::HashSet;

use crate::diag::{content_lines, Diagnostics};
use crate::fs::{parse_fs, with_scratch, AvmReader, FeatureStructure, Handle, Node, NodeId, Store};
use crate::lexicon::TagwordTable;
use crate::symbol::Symbol;
use crate::tagset::TagSequence;

const MOTHER: &str = "mother";
const DAUGHTERS: [&str; 2] = ["dtr0", "dtr1"];

/// Label of the `i`-th lexical slot in a macro structure.
pub fn slot_label(i: usize) -> Symbol {
    Symbol::from(format!("slot{i}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: Symbol,
    /// `[mother: M, dtr0: D0, dtr1: D1]` with rule-internal sharing.
    fs: FeatureStructure,
    arity: usize,
    guards: Vec<Vec<(Symbol, Symbol)>>,
}

impl Rule {
    pub fn new(name: impl Into<Symbol>, fs: FeatureStructure) -> Result<Rule, String> {
        let name = name.into();
        if fs.child(0, MOTHER).is_none() {
            return Err(format!("rule `{name}` has no mother"));
        }
        let arity = DAUGHTERS.iter().take_while(|d| fs.child(0, d).is_some()).count();
        if arity == 0 {
            return Err(format!("rule `{name}` has no daughters"));
        }
        let guards = DAUGHTERS[..arity]
            .iter()
            .map(|d| top_atoms(&fs, fs.child(0, d).unwrap()))
            .collect();
        Ok(Rule { name, fs, arity, guards })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn mother(&self) -> FeatureStructure {
        self.fs.subgraph(self.fs.child(0, MOTHER).unwrap())
    }

    pub fn daughter(&self, i: usize) -> FeatureStructure {
        self.fs.subgraph(self.fs.child(0, DAUGHTERS[i]).unwrap())
    }

    pub fn as_fs(&self) -> &FeatureStructure {
        &self.fs
    }

    /// Cheap pre-check: top-level atoms of daughter `i` that clash with
    /// atoms of `fs` rule out unification.
    fn admits(&self, i: usize, fs: &FeatureStructure) -> bool {
        self.guards[i].iter().all(|(f, v)| match fs.child(0, f.as_str()) {
            Some(c) => !matches!(fs.node(c), Node::Atom(a) if a != v) && !matches!(fs.node(c), Node::Complex(_)),
            None => true,
        })
    }
}

fn top_atoms(fs: &FeatureStructure, id: NodeId) -> Vec<(Symbol, Symbol)> {
    match fs.node(id) {
        Node::Complex(arcs) => arcs
            .iter()
            .filter_map(|(f, c)| match fs.node(*c) {
                Node::Atom(a) => Some((f.clone(), a.clone())),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub start: FeatureStructure,
    rules: Vec<Rule>,
}

impl Grammar {
    pub fn new(start: FeatureStructure, rules: Vec<Rule>) -> Grammar {
        Grammar { start, rules }
    }

    pub fn parse(text: &str) -> Result<Grammar, Diagnostics> {
        let mut diags = Diagnostics::default();
        let mut start = None;
        let mut rules: Vec<Rule> = Vec::new();
        let mut names = HashSet::new();
        for (line, content) in content_lines(text) {
            let (directive, rest) = content
                .split_once(char::is_whitespace)
                .map_or((content, ""), |(d, r)| (d, r.trim()));
            let col = content.len() - rest.len() + 1;
            match directive {
                "start" => match parse_fs(rest) {
                    Ok(_) if start.is_some() => diags.push(line, "second `start` constraint"),
                    Ok(fs) => start = Some(fs),
                    Err(e) => diags.push(line, format!("start: {}", e.offset(line, col))),
                },
                "rule" => {
                    let Some((name, body)) = rest.split_once("->") else {
                        diags.push(line, "expected `rule <name> -> <mother> := <daughter> [<daughter>]`");
                        continue;
                    };
                    let name = name.trim();
                    let body_col = content.len() - body.len() + 1;
                    match read_rule(body) {
                        Ok(fs) => match Rule::new(name, fs) {
                            Ok(r) => {
                                if !names.insert(r.name.clone()) {
                                    diags.push(line, format!("duplicate rule `{name}`"));
                                }
                                rules.push(r);
                            }
                            Err(m) => diags.push(line, m),
                        },
                        Err(e) => diags.push(line, format!("rule `{name}`: {}", e.offset(line, body_col))),
                    }
                }
                other => diags.push(line, format!("unknown directive `{other}`")),
            }
        }
        if rules.is_empty() {
            diags.push(0, "grammar declares no rules");
        }
        let start = start.unwrap_or_else(|| {
            diags.push(0, "grammar declares no `start` constraint");
            FeatureStructure::top()
        });
        diags.into_result(Grammar { start, rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name.as_str() == name)
    }

    /// All complete parses over one leaf per position.
    pub fn parse_leaves(&self, leaves: &[FeatureStructure]) -> Vec<ParseTree> {
        let lattice: Vec<Vec<FeatureStructure>> = leaves.iter().map(|l| vec![l.clone()]).collect();
        self.parse_lattice(&lattice)
    }

    /// All complete parses where each position offers alternative leaves.
    pub fn parse_lattice(&self, lattice: &[Vec<FeatureStructure>]) -> Vec<ParseTree> {
        let chart = self.fill(lattice);
        let n = lattice.len();
        if n == 0 {
            return Vec::new();
        }
        chart
            .complete(n, &self.start)
            .into_iter()
            .map(|e| {
                let derivation = chart.derivation(0, n, e, self);
                self.replay(&derivation, lattice)
                    .expect("replaying a chart derivation succeeds")
            })
            .collect()
    }

    /// Parses the tag-word entries of `seq`.
    pub fn parse_tags(&self, words: &TagwordTable, seq: &TagSequence) -> Vec<ParseTree> {
        let leaves: Vec<FeatureStructure> = seq
            .tags()
            .iter()
            .map(|t| words.get(t.as_str()).expect("tags in sequences are declared").fs.clone())
            .collect();
        self.parse_leaves(&leaves)
    }

    /// True if some complete parse exists; skips building trees.
    pub fn recognizes(&self, lattice: &[Vec<FeatureStructure>]) -> bool {
        !lattice.is_empty() && !self.fill(lattice).complete(lattice.len(), &self.start).is_empty()
    }

    fn fill(&self, lattice: &[Vec<FeatureStructure>]) -> Chart {
        with_scratch(|store| self.fill_in(lattice, store))
    }

    fn fill_in(&self, lattice: &[Vec<FeatureStructure>], store: &mut Store) -> Chart {
        let n = lattice.len();
        let mut chart = Chart {
            n,
            cells: vec![Vec::new(); n * (n + 1)],
        };
        for (i, alts) in lattice.iter().enumerate() {
            let cell = chart.at_mut(i, i + 1);
            for (choice, fs) in alts.iter().enumerate() {
                cell.push(Edge {
                    fs: fs.clone(),
                    back: Back::Leaf { choice },
                });
            }
            self.unary_closure(&mut chart, i, i + 1, 0, store);
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut found = Vec::new();
                for (r, rule) in self.rules.iter().enumerate().filter(|(_, r)| r.arity == 2) {
                    for k in i + 1..j {
                        for (a, left) in chart.at(i, k).iter().enumerate() {
                            if !rule.admits(0, &left.fs) {
                                continue;
                            }
                            for (b, right) in chart.at(k, j).iter().enumerate() {
                                if !rule.admits(1, &right.fs) {
                                    continue;
                                }
                                if let Some(fs) = apply(store, rule, &[&left.fs, &right.fs]) {
                                    found.push(Edge {
                                        fs,
                                        back: Back::Rule {
                                            rule: r,
                                            kids: vec![(i, k, a), (k, j, b)],
                                        },
                                    });
                                }
                            }
                        }
                    }
                }
                *chart.at_mut(i, j) = found;
                self.unary_closure(&mut chart, i, j, 0, store);
            }
        }
        chart
    }

    fn unary_closure(&self, chart: &mut Chart, i: usize, j: usize, from: usize, store: &mut Store) {
        let mut lo = from;
        let mut depth = 0;
        let max_depth = self.rules.len() + 1;
        while lo < chart.at(i, j).len() && depth < max_depth {
            let hi = chart.at(i, j).len();
            let mut found = Vec::new();
            for (r, rule) in self.rules.iter().enumerate().filter(|(_, r)| r.arity == 1) {
                for a in lo..hi {
                    let fs = &chart.at(i, j)[a].fs;
                    if !rule.admits(0, fs) {
                        continue;
                    }
                    if let Some(m) = apply(store, rule, &[fs]) {
                        found.push(Edge {
                            fs: m,
                            back: Back::Rule {
                                rule: r,
                                kids: vec![(i, j, a)],
                            },
                        });
                    }
                }
            }
            chart.at_mut(i, j).extend(found);
            lo = hi;
            depth += 1;
        }
    }

    /// Rebuilds a derivation in one scratch store, yielding the full tree.
    pub fn replay(&self, derivation: &Derivation, lattice: &[Vec<FeatureStructure>]) -> Option<ParseTree> {
        let mut store = Store::new();
        let mut slots: Vec<Option<(Handle, usize)>> = vec![None; lattice.len()];
        let top = self.build(&mut store, derivation, lattice, &mut slots)?;
        let macro_root = store.new_top();
        store.add_arc(macro_root, Symbol::from(MOTHER), top).ok()?;
        let mut track = Vec::with_capacity(slots.len());
        let mut leaves = Vec::with_capacity(slots.len());
        for (i, s) in slots.iter().enumerate() {
            let (h, choice) = (*s)?;
            store.add_arc(macro_root, slot_label(i), h).ok()?;
            track.push(h);
            leaves.push((i, lattice[i][choice].clone(), choice));
        }
        let (macro_fs, anchors) = store.extract_mapped(macro_root, &track).ok()?;
        let slot_anchors = anchors.into_iter().collect::<Option<Vec<_>>>()?;
        let root_fs = macro_fs.subgraph(macro_fs.child(0, MOTHER)?);
        Some(ParseTree {
            root_fs,
            macro_fs,
            slot_anchors,
            derivation: derivation.clone(),
            leaves,
        })
    }

    fn build(
        &self,
        store: &mut Store,
        d: &Derivation,
        lattice: &[Vec<FeatureStructure>],
        slots: &mut [Option<(Handle, usize)>],
    ) -> Option<Handle> {
        match d {
            Derivation::Leaf { position, choice } => {
                let h = store.load(lattice.get(*position)?.get(*choice)?);
                slots[*position] = Some((h, *choice));
                Some(h)
            }
            Derivation::Rule { rule, children, .. } => {
                let rule = self.rule(rule.as_str())?;
                if children.len() != rule.arity {
                    return None;
                }
                let r = store.load(&rule.fs);
                for (k, child) in children.iter().enumerate() {
                    let c = self.build(store, child, lattice, slots)?;
                    let d = store.child(r, DAUGHTERS[k])?;
                    if !store.unify(d, c) {
                        return None;
                    }
                }
                store.child(r, MOTHER)
            }
        }
    }
}

fn read_rule(body: &str) -> Result<FeatureStructure, crate::fs::FsError> {
    let mut rd = AvmReader::new(body)?;
    let mother = rd.read_value()?;
    rd.expect_assign()?;
    let mut parts = vec![(MOTHER, mother)];
    for d in DAUGHTERS {
        if rd.at_end() {
            break;
        }
        parts.push((d, rd.read_value()?));
    }
    let root = rd.join(&parts);
    rd.finish(root)
}

fn apply(store: &mut Store, rule: &Rule, kids: &[&FeatureStructure]) -> Option<FeatureStructure> {
    store.clear();
    let r = store.load(&rule.fs);
    for (k, fs) in kids.iter().enumerate() {
        let h = store.load(fs);
        let d = store.child(r, DAUGHTERS[k])?;
        if !store.unify(d, h) {
            return None;
        }
    }
    let m = store.child(r, MOTHER)?;
    store.extract(m).ok()
}

#[derive(Debug, Clone)]
struct Edge {
    fs: FeatureStructure,
    back: Back,
}

#[derive(Debug, Clone)]
enum Back {
    Leaf { choice: usize },
    Rule { rule: usize, kids: Vec<(usize, usize, usize)> },
}

struct Chart {
    n: usize,
    cells: Vec<Vec<Edge>>,
}

impl Chart {
    fn at(&self, i: usize, j: usize) -> &Vec<Edge> {
        &self.cells[i * (self.n + 1) + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Vec<Edge> {
        &mut self.cells[i * (self.n + 1) + j]
    }

    fn complete(&self, n: usize, start: &FeatureStructure) -> Vec<usize> {
        self.at(0, n)
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e.back, Back::Rule { .. }) && crate::fs::unify(&e.fs, start).is_some())
            .map(|(k, _)| k)
            .collect()
    }

    fn derivation(&self, i: usize, j: usize, e: usize, g: &Grammar) -> Derivation {
        match &self.at(i, j)[e].back {
            Back::Leaf { choice } => Derivation::Leaf {
                position: i,
                choice: *choice,
            },
            Back::Rule { rule, kids } => Derivation::Rule {
                rule: g.rules[*rule].name.clone(),
                span: (i, j),
                children: kids.iter().map(|&(a, b, k)| self.derivation(a, b, k, g)).collect(),
            },
        }
    }
}

/// Rule applications of one parse, with the spans they cover.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Derivation {
    Leaf { position: usize, choice: usize },
    Rule {
        rule: Symbol,
        span: (usize, usize),
        children: Vec<Derivation>,
    },
}

impl Derivation {
    /// Bracketed rendering such as `(np_det 0 (nbar_n 1))`.
    pub fn skeleton(&self) -> String {
        match self {
            Derivation::Leaf { position, .. } => position.to_string(),
            Derivation::Rule { rule, children, .. } => {
                let kids: Vec<String> = children.iter().map(Derivation::skeleton).collect();
                format!("({rule} {})", kids.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseTree {
    /// Structure built by the top rule application.
    pub root_fs: FeatureStructure,
    /// `[mother: root, slot0: leaf0, ...]` with all sharing intact.
    pub macro_fs: FeatureStructure,
    /// Node of `macro_fs` holding each position's (unified) leaf.
    pub slot_anchors: Vec<NodeId>,
    pub derivation: Derivation,
    /// `(position, leaf as given, alternative chosen)`.
    pub leaves: Vec<(usize, FeatureStructure, usize)>,
}
