//! Canonical AVM text form.
//!
//! ```text
//! value   := tag? body | tag
//! tag     := '#' digits
//! body    := atom | '[' (feature ':' value (',' feature ':' value)*)? ']'
//! ```
//!
//! `[]` is the unconstrained value. A tag names one shared node; its value
//! may be given at any (or several) of its occurrences. Whitespace between
//! tokens is ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::symbol::Symbol;

use super::store::{ArcError, CycleAt, Handle, Store};
use super::{FeatureStructure, Node, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FsError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}, column {col}: duplicate feature `{feature}`")]
    DuplicateFeature { line: usize, col: usize, feature: String },
    #[error("line {line}, column {col}: conflicting values for #{tag}")]
    TagClash { line: usize, col: usize, tag: u32 },
    #[error("line {line}, column {col}: #{tag} makes the structure cyclic")]
    Cycle { line: usize, col: usize, tag: u32 },
}

impl FsError {
    /// Shifts the reported position as if the text started at `line`,
    /// `col` of some enclosing file.
    pub fn offset(self, line: usize, col: usize) -> FsError {
        let shift = |l: usize, c: usize| if l == 1 { (line, col + c - 1) } else { (line + l - 1, c) };
        match self {
            FsError::Syntax { line: l, col: c, message } => {
                let (line, col) = shift(l, c);
                FsError::Syntax { line, col, message }
            }
            FsError::DuplicateFeature { line: l, col: c, feature } => {
                let (line, col) = shift(l, c);
                FsError::DuplicateFeature { line, col, feature }
            }
            FsError::TagClash { line: l, col: c, tag } => {
                let (line, col) = shift(l, c);
                FsError::TagClash { line, col, tag }
            }
            FsError::Cycle { line: l, col: c, tag } => {
                let (line, col) = shift(l, c);
                FsError::Cycle { line, col, tag }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Colon,
    Assign,
    Tag(u32),
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Open => "`[`".into(),
        Tok::Close => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Assign => "`:=`".into(),
        Tok::Tag(n) => format!("`#{n}`"),
        Tok::Atom(a) => format!("`{a}`"),
    }
}

fn tokenize(text: &str) -> Result<(Vec<Spanned>, (usize, usize)), FsError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let syntax = |message: String| FsError::Syntax { line: l, col: k, message };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        let tok = match c {
            '[' => {
                chars.next();
                col += 1;
                Tok::Open
            }
            ']' => {
                chars.next();
                col += 1;
                Tok::Close
            }
            ',' => {
                chars.next();
                col += 1;
                Tok::Comma
            }
            ':' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    Tok::Assign
                } else {
                    Tok::Colon
                }
            }
            '#' => {
                chars.next();
                col += 1;
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    chars.next();
                    col += 1;
                }
                let n = digits
                    .parse::<u32>()
                    .map_err(|_| syntax("expected digits after `#`".into()))?;
                Tok::Tag(n)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    s.push(d);
                    chars.next();
                    col += 1;
                }
                Tok::Atom(s)
            }
            other => return Err(syntax(format!("unexpected character {other:?}"))),
        };
        out.push(Spanned { tok, line: l, col: k });
    }
    Ok((out, (line, col)))
}

/// Incremental reader for one or more AVMs that share a tag scope.
///
/// Grammar rules use this to read a mother and its daughters, so that a
/// tag such as `#1` means the same node in all of them.
pub struct AvmReader {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    store: Store,
    tags: HashMap<u32, Handle>,
    sites: Vec<(u32, Handle, usize, usize)>,
}

impl AvmReader {
    pub fn new(text: &str) -> Result<Self, FsError> {
        let (toks, end) = tokenize(text)?;
        Ok(AvmReader {
            toks,
            pos: 0,
            end,
            store: Store::new(),
            tags: HashMap::new(),
            sites: Vec::new(),
        })
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.col))
    }

    fn error(&self, message: impl Into<String>) -> FsError {
        let (line, col) = self.here();
        FsError::Syntax { line, col, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> FsError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", describe(t))),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    /// Consumes the `:=` separator.
    pub fn expect_assign(&mut self) -> Result<(), FsError> {
        if self.peek() == Some(&Tok::Assign) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected("`:=`"))
        }
    }

    pub fn read_value(&mut self) -> Result<Handle, FsError> {
        let (line, col) = self.here();
        if let Some(&Tok::Tag(n)) = self.peek() {
            self.pos += 1;
            let tag = match self.tags.get(&n) {
                Some(&h) => h,
                None => {
                    let h = self.store.new_top();
                    self.tags.insert(n, h);
                    h
                }
            };
            self.sites.push((n, tag, line, col));
            if matches!(self.peek(), Some(Tok::Open) | Some(Tok::Atom(_))) {
                let body = self.read_body()?;
                if !self.store.unify(tag, body) {
                    return Err(FsError::TagClash { line, col, tag: n });
                }
            }
            return Ok(tag);
        }
        self.read_body()
    }

    fn read_body(&mut self) -> Result<Handle, FsError> {
        match self.peek().cloned() {
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                Ok(self.store.new_atom(Symbol::from(a)))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let node = self.store.new_top();
                if self.peek() == Some(&Tok::Close) {
                    self.pos += 1;
                    return Ok(node);
                }
                loop {
                    let (line, col) = self.here();
                    let Some(Tok::Atom(feature)) = self.peek().cloned() else {
                        return Err(self.unexpected("a feature name"));
                    };
                    self.pos += 1;
                    if self.peek() != Some(&Tok::Colon) {
                        return Err(self.unexpected("`:`"));
                    }
                    self.pos += 1;
                    let child = self.read_value()?;
                    match self.store.add_arc(node, Symbol::from(feature.as_str()), child) {
                        Ok(()) => {}
                        Err(ArcError::Duplicate(_)) => {
                            return Err(FsError::DuplicateFeature { line, col, feature })
                        }
                        Err(ArcError::Atomic) => unreachable!("fresh bracket node is never atomic"),
                    }
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        Some(Tok::Close) => {
                            self.pos += 1;
                            return Ok(node);
                        }
                        _ => return Err(self.unexpected("`,` or `]`")),
                    }
                }
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    /// A fresh complex node with the given labelled children.
    pub fn join(&mut self, parts: &[(&str, Handle)]) -> Handle {
        let node = self.store.new_top();
        for &(label, h) in parts {
            self.store
                .add_arc(node, Symbol::from(label), h)
                .expect("labels are distinct");
        }
        node
    }

    pub fn finish(self, root: Handle) -> Result<FeatureStructure, FsError> {
        self.finish_mapped(root, &[]).map(|(fs, _)| fs)
    }

    /// Extracts `root`, reporting where each of `track` ended up.
    pub fn finish_mapped(
        mut self,
        root: Handle,
        track: &[Handle],
    ) -> Result<(FeatureStructure, Vec<Option<NodeId>>), FsError> {
        if !self.at_end() {
            return Err(self.unexpected("end of input"));
        }
        match self.store.extract_mapped(root, track) {
            Ok(r) => Ok(r),
            Err(CycleAt(rep)) => {
                let sites = std::mem::take(&mut self.sites);
                let site = sites
                    .iter()
                    .find(|s| self.store.find(s.1) == rep)
                    .or(sites.last())
                    .copied();
                let (tag, _, line, col) = site.unwrap_or((0, 0, 1, 1));
                Err(FsError::Cycle { line, col, tag })
            }
        }
    }
}

/// Parses one AVM.
pub fn parse_fs(text: &str) -> Result<FeatureStructure, FsError> {
    let mut r = AvmReader::new(text)?;
    let root = r.read_value()?;
    r.finish(root)
}

/// Canonical text: arcs sorted by feature name, shared nodes tagged `#n`
/// in depth-first order of first visit, value written at first occurrence.
pub fn render(fs: &FeatureStructure) -> String {
    let deg = fs.in_degrees();
    let mut tag = vec![0u32; fs.len()];
    let mut next = 1;
    // canonical ids are first-visit order, so numbering by id is numbering by visit
    for (id, d) in deg.iter().enumerate() {
        if *d > 1 {
            tag[id] = next;
            next += 1;
        }
    }
    let mut out = String::new();
    let mut done = vec![false; fs.len()];
    write_node(fs, FeatureStructure::ROOT, &tag, &mut done, &mut out);
    out
}

fn write_node(fs: &FeatureStructure, id: NodeId, tag: &[u32], done: &mut [bool], out: &mut String) {
    if tag[id] > 0 {
        let _ = write!(out, "#{}", tag[id]);
        if done[id] {
            return;
        }
        done[id] = true;
        if matches!(fs.node(id), Node::Top) {
            return;
        }
        out.push(' ');
    }
    match fs.node(id) {
        Node::Top => out.push_str("[]"),
        Node::Atom(s) => out.push_str(s.as_str()),
        Node::Complex(arcs) => {
            out.push('[');
            for (i, (f, c)) in arcs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(f.as_str());
                out.push(':');
                write_node(fs, *c, tag, done, out);
            }
            out.push(']');
        }
    }
}
