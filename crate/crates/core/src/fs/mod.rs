//! Untyped attribute-value feature structures.
//!
//! A [`FeatureStructure`] is an immutable rooted DAG. Every value is kept in
//! canonical form: nodes are numbered in depth-first first-visit order with
//! arcs sorted by feature name, and the root is node 0. Two structures are
//! therefore isomorphic exactly when they are `==`, which makes hashing and
//! deduplication cheap.
//!
//! Destructive work happens in a scratch [`Store`]; the free functions in
//! this module ([`unify`], [`subsumes`], [`generalize`], [`restrict`]) never
//! touch their inputs.

mod retention;
mod store;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::symbol::{is_atom_text, Symbol};

pub use retention::{RetentionError, RetentionSpec};
pub use store::{with_scratch, ArcError, CycleAt, Handle, Store};
pub use text::{parse_fs, render, AvmReader, FsError};

/// Index of a node inside one [`FeatureStructure`].
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// Unconstrained.
    Top,
    Atom(Symbol),
    /// Outgoing arcs, sorted by feature name, never empty.
    Complex(Vec<(Symbol, NodeId)>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    nodes: Vec<Node>,
}

impl FeatureStructure {
    pub fn top() -> Self {
        FeatureStructure {
            nodes: vec![Node::Top],
        }
    }

    pub fn atom(value: impl Into<Symbol>) -> Self {
        FeatureStructure {
            nodes: vec![Node::Atom(value.into())],
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> NodeId {
        Self::ROOT
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_top(&self) -> bool {
        matches!(self.nodes[0], Node::Top)
    }

    pub fn child(&self, id: NodeId, feature: &str) -> Option<NodeId> {
        match &self.nodes[id] {
            Node::Complex(arcs) => arcs
                .binary_search_by(|(f, _)| f.as_str().cmp(feature))
                .ok()
                .map(|i| arcs[i].1),
            _ => None,
        }
    }

    /// Follows `path` from the root.
    pub fn get(&self, path: &FeaturePath) -> Option<NodeId> {
        self.get_from(Self::ROOT, path)
    }

    pub fn get_from(&self, start: NodeId, path: &FeaturePath) -> Option<NodeId> {
        path.segments()
            .iter()
            .try_fold(start, |n, f| self.child(n, f.as_str()))
    }

    pub fn atom_at(&self, path: &FeaturePath) -> Option<&Symbol> {
        match self.get(path).map(|n| &self.nodes[n]) {
            Some(Node::Atom(s)) => Some(s),
            _ => None,
        }
    }

    /// The structure rooted at `id`, with sharing preserved.
    pub fn subgraph(&self, id: NodeId) -> FeatureStructure {
        if id == Self::ROOT {
            return self.clone();
        }
        let mut store = Store::with_capacity(self.nodes.len());
        let base = store.load(self);
        store.extract(base + id).expect("acyclic by construction")
    }

    /// Number of arcs pointing at each node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for node in &self.nodes {
            if let Node::Complex(arcs) = node {
                for &(_, c) in arcs {
                    deg[c] += 1;
                }
            }
        }
        deg
    }

    /// Every path from the root, each with the node it reaches, in
    /// depth-first order. Shared nodes are reported once per path.
    pub fn paths(&self) -> Vec<(FeaturePath, NodeId)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), Self::ROOT)];
        while let Some((prefix, n)) = stack.pop() {
            if let Node::Complex(arcs) = &self.nodes[n] {
                for (f, c) in arcs.iter().rev() {
                    let mut p = prefix.clone();
                    p.push(f.clone());
                    stack.push((p, *c));
                }
            }
            out.push((FeaturePath(prefix), n));
        }
        out
    }

    /// All feature names used anywhere in the structure.
    pub fn features(&self) -> impl Iterator<Item = &Symbol> {
        self.nodes.iter().flat_map(|n| match n {
            Node::Complex(arcs) => arcs.iter().map(|(f, _)| f).collect::<Vec<_>>(),
            _ => Vec::new(),
        })
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Debug for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureStructure({})", render(self))
    }
}

impl FromStr for FeatureStructure {
    type Err = FsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_fs(s)
    }
}

/// A sequence of feature names addressing a node from some root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FeaturePath(Vec<Symbol>);

impl FeaturePath {
    pub fn root() -> Self {
        FeaturePath(Vec::new())
    }

    pub fn new(segments: Vec<Symbol>) -> Self {
        FeaturePath(segments)
    }

    pub fn segments(&self) -> &[Symbol] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, feature: impl Into<Symbol>) -> FeaturePath {
        let mut v = self.0.clone();
        v.push(feature.into());
        FeaturePath(v)
    }

    /// `prefix` followed by this path.
    pub fn under(&self, prefix: &Symbol) -> FeaturePath {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(prefix.clone());
        v.extend(self.0.iter().cloned());
        FeaturePath(v)
    }
}

impl fmt::Display for FeaturePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(".");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(s.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid feature path {0:?}")]
pub struct BadPath(pub String);

impl FromStr for FeaturePath {
    type Err = BadPath;

    /// Dot-separated feature names; a lone `.` is the root path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "." {
            return Ok(FeaturePath::root());
        }
        let segs: Vec<&str> = s.split('.').collect();
        if segs.iter().any(|p| !is_atom_text(p)) {
            return Err(BadPath(s.to_string()));
        }
        Ok(FeaturePath(segs.into_iter().map(Symbol::from).collect()))
    }
}

/// Most general structure subsumed by both inputs, or `None` on a clash.
///
/// A unification that would create a cycle is also reported as a clash.
pub fn unify(a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
    let mut store = Store::with_capacity(a.len() + b.len());
    let ra = store.load(a);
    let rb = store.load(b);
    if !store.unify(ra, rb) {
        return None;
    }
    store.extract(ra).ok()
}

/// True iff every constraint of `a` (arcs, atomic values, shared nodes)
/// also holds in `b`.
pub fn subsumes(a: &FeatureStructure, b: &FeatureStructure) -> bool {
    let mut image: Vec<Option<NodeId>> = vec![None; a.len()];
    image[0] = Some(0);
    let mut stack = vec![(0usize, 0usize)];
    while let Some((na, nb)) = stack.pop() {
        match (&a.nodes[na], &b.nodes[nb]) {
            (Node::Top, _) => {}
            (Node::Atom(x), Node::Atom(y)) if x == y => {}
            (Node::Complex(arcs), Node::Complex(_)) => {
                for (f, ca) in arcs {
                    let Some(cb) = b.child(nb, f.as_str()) else {
                        return false;
                    };
                    match image[*ca] {
                        Some(m) if m != cb => return false,
                        Some(_) => {}
                        None => {
                            image[*ca] = Some(cb);
                            stack.push((*ca, cb));
                        }
                    }
                }
            }
            _ => return false,
        }
    }
    true
}

/// Mutual subsumption.
pub fn equivalent(a: &FeatureStructure, b: &FeatureStructure) -> bool {
    subsumes(a, b) && subsumes(b, a)
}

/// Anti-unification: the least general structure subsuming both inputs.
///
/// Arcs survive only where both inputs have them; a feature present in
/// both with clashing values keeps its arc with an unconstrained value.
/// Sharing survives only where both inputs share.
pub fn generalize(a: &FeatureStructure, b: &FeatureStructure) -> FeatureStructure {
    struct Gen<'a> {
        a: &'a FeatureStructure,
        b: &'a FeatureStructure,
        store: Store,
        memo: HashMap<(NodeId, NodeId), Handle>,
    }

    impl Gen<'_> {
        fn pair(&mut self, na: NodeId, nb: NodeId) -> Handle {
            if let Some(&h) = self.memo.get(&(na, nb)) {
                return h;
            }
            let h = self.store.new_top();
            self.memo.insert((na, nb), h);
            match (&self.a.nodes[na], &self.b.nodes[nb]) {
                (Node::Atom(x), Node::Atom(y)) if x == y => {
                    self.store.set_atom(h, x.clone());
                }
                (Node::Complex(xs), Node::Complex(ys)) => {
                    let (xs, ys) = (xs.clone(), ys.clone());
                    let (mut i, mut j) = (0, 0);
                    while i < xs.len() && j < ys.len() {
                        match xs[i].0.cmp(&ys[j].0) {
                            std::cmp::Ordering::Less => i += 1,
                            std::cmp::Ordering::Greater => j += 1,
                            std::cmp::Ordering::Equal => {
                                let c = self.pair(xs[i].1, ys[j].1);
                                self.store
                                    .add_arc(h, xs[i].0.clone(), c)
                                    .expect("fresh node, distinct features");
                                i += 1;
                                j += 1;
                            }
                        }
                    }
                }
                _ => {}
            }
            h
        }
    }

    let mut g = Gen {
        a,
        b,
        store: Store::new(),
        memo: HashMap::new(),
    };
    let root = g.pair(0, 0);
    g.store.extract(root).expect("subgraph of acyclic inputs")
}

/// Prunes `fs` down to what `spec` retains. See [`RetentionSpec`].
pub fn restrict(fs: &FeatureStructure, spec: &RetentionSpec) -> FeatureStructure {
    restrict_mapped(fs, spec).0
}

/// Like [`restrict`], additionally mapping every node of `fs` to its image
/// in the result (`None` for pruned nodes).
pub fn restrict_mapped(
    fs: &FeatureStructure,
    spec: &RetentionSpec,
) -> (FeatureStructure, Vec<Option<NodeId>>) {
    let mut store = Store::new();
    let mut handle: Vec<Option<Handle>> = vec![None; fs.len()];
    let mut seen = std::collections::HashSet::new();
    let trie = spec.trie();

    let root = store.new_top();
    handle[0] = Some(root);
    let mut stack = vec![(0usize, 0usize)];
    while let Some((t, n)) = stack.pop() {
        if !seen.insert((t, n)) {
            continue;
        }
        let h = handle[n].expect("visited nodes have handles");
        let tnode = &trie[t];
        if tnode.keep_value {
            if let Node::Atom(s) = &fs.nodes[n] {
                store.set_atom(h, s.clone());
            }
        }
        for (f, tc) in &tnode.children {
            let Some(c) = fs.child(n, f.as_str()) else {
                continue;
            };
            let ch = match handle[c] {
                Some(ch) => ch,
                None => {
                    let ch = store.new_top();
                    handle[c] = Some(ch);
                    ch
                }
            };
            if store.child(h, f.as_str()).is_none() {
                store.add_arc(h, f.clone(), ch).expect("node reached through arcs is not atomic");
            }
            stack.push((*tc, c));
        }
    }
    let track: Vec<Handle> = handle.iter().map(|h| h.unwrap_or(root)).collect();
    let (out, mapped) = store
        .extract_mapped(root, &track)
        .expect("subgraph of acyclic input");
    let mapped = mapped.into_iter().zip(&handle).map(|(m, h)| h.and(m)).collect();
    (out, mapped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(s: &str) -> FeatureStructure {
        parse_fs(s).unwrap()
    }

    #[test]
    fn unify_top_is_identity() {
        let x = fs("[a:[b:x], c:#1, d:#1]");
        assert_eq!(unify(&FeatureStructure::top(), &x), Some(x.clone()));
        assert_eq!(unify(&x, &FeatureStructure::top()), Some(x));
    }

    #[test]
    fn unify_is_idempotent_on_flat_values() {
        let x = fs("[num:sg]");
        assert_eq!(unify(&x, &x), Some(x));
    }

    #[test]
    fn unify_propagates_through_shared_nodes() {
        // [a:#1, b:#1] ⊔ [a:x]: the shared node receives x, so b sees it too.
        let r = unify(&fs("[a:#1, b:#1]"), &fs("[a:x]")).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.get(&"a".parse().unwrap()), r.get(&"b".parse().unwrap()));
        assert_eq!(r.atom_at(&"b".parse().unwrap()).unwrap(), "x");
        assert_eq!(render(&r), "[a:#1 x, b:#1]");
    }

    #[test]
    fn unify_atomic_clash_fails() {
        assert_eq!(unify(&fs("[num:sg]"), &fs("[num:pl]")), None);
        assert_eq!(unify(&fs("[num:sg]"), &fs("[num:[x:y]]")), None);
    }

    #[test]
    fn unify_rejects_cycles() {
        // a = a.f is forced by sharing on one side and nesting on the other
        assert_eq!(unify(&fs("[a:#1, b:#1]"), &fs("[a:[f:#2], b:#2]")), None);
    }

    #[test]
    fn subsumption_basics() {
        let x = fs("[a:x, b:[c:#1, d:#1]]");
        assert!(subsumes(&FeatureStructure::top(), &x));
        assert!(subsumes(&x, &x));
        assert!(!subsumes(&fs("[a:x]"), &fs("[a:y]")));
        assert!(subsumes(&fs("[b:[c:[], d:[]]]"), &x));
        assert!(!subsumes(&x, &fs("[a:x, b:[c:[], d:[]]]")));
    }

    #[test]
    fn generalize_examples() {
        let x = fs("[a:#1 x, b:#1, c:[d:e]]");
        assert_eq!(generalize(&x, &x), x);
        assert_eq!(generalize(&fs("[num:sg]"), &fs("[num:pl]")), fs("[num:[]]"));
        assert_eq!(generalize(&fs("[a:x, b:y]"), &fs("[a:x, b:z]")), fs("[a:x, b:[]]"));
        // sharing survives only where both sides share
        assert_eq!(generalize(&fs("[a:#1, b:#1]"), &fs("[a:x, b:x]")), fs("[a:[], b:[]]"));
        assert_eq!(generalize(&fs("[a:#1 x, b:#1]"), &fs("[a:#2, b:#2]")), fs("[a:#1, b:#1]"));
        // disjoint arcs collapse to top
        assert!(generalize(&fs("[a:x]"), &fs("[b:x]")).is_top());
    }

    #[test]
    fn restrict_keeps_sharing_and_selected_values() {
        let spec = RetentionSpec::new(
            ["gap", "filler"].iter().map(|p| p.parse().unwrap()),
            ["gap"].iter().map(|p| p.parse().unwrap()),
        )
        .unwrap();
        let r = restrict(&fs("[gap:#1 none, filler:#1, sem:big]"), &spec);
        assert_eq!(r, fs("[gap:#1 none, filler:#1]"));
        assert_eq!(render(&r), "[filler:#1 none, gap:#1]");
    }

    #[test]
    fn restrict_drops_values_off_value_paths() {
        let spec = RetentionSpec::new(
            ["a", "b.c"].iter().map(|p| p.parse().unwrap()),
            ["b.c"].iter().map(|p| p.parse().unwrap()),
        )
        .unwrap();
        let r = restrict(&fs("[a:x, b:[c:y, d:z], e:w]"), &spec);
        assert_eq!(r, fs("[a:[], b:[c:y]]"));
    }

    #[test]
    fn restrict_with_every_path_is_identity() {
        let x = fs("[a:#1 x, b:#1, c:[d:e, f:[]]]");
        let paths: Vec<FeaturePath> = x.paths().into_iter().map(|(p, _)| p).collect();
        let spec = RetentionSpec::new(paths.clone(), paths).unwrap();
        assert_eq!(restrict(&x, &spec), x);
    }

    #[test]
    fn restrict_maps_nodes() {
        let x = fs("[a:#1 [b:c], d:#1, e:f]");
        let spec = RetentionSpec::new(["a", "d"].iter().map(|p| p.parse().unwrap()), ["a"].iter().map(|p| p.parse().unwrap())).unwrap();
        let (r, map) = restrict_mapped(&x, &spec);
        let shared = x.get(&"a".parse().unwrap()).unwrap();
        assert_eq!(map[shared], r.get(&"d".parse().unwrap()));
        let e = x.get(&"e".parse().unwrap()).unwrap();
        assert_eq!(map[e], None);
        assert_eq!(map[0], Some(0));
    }

    #[test]
    fn paths_and_lookup() {
        let x = fs("[a:[b:c], d:e]");
        let ps: Vec<String> = x.paths().iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(ps, vec![".", "a", "a.b", "d"]);
        assert_eq!(x.subgraph(x.get(&"a".parse().unwrap()).unwrap()), fs("[b:c]"));
    }

    #[test]
    fn feature_path_parsing() {
        assert!("a.b".parse::<FeaturePath>().is_ok());
        assert!(".".parse::<FeaturePath>().unwrap().is_root());
        assert!("a..b".parse::<FeaturePath>().is_err());
        assert!("".parse::<FeaturePath>().is_err());
    }
}
