use crate::symbol::Symbol;

use super::{FeatureStructure, Node, NodeId};

/// Handle to a node inside a [`Store`].
pub type Handle = usize;

#[derive(Clone, Debug)]
enum Kind {
    Top,
    Atom(Symbol),
    /// Arcs live in `Store::arcs[start..start + len]`.
    Complex { start: usize, len: usize },
}

#[derive(Clone, Debug)]
struct Cell {
    parent: Handle,
    kind: Kind,
}

/// The result of extracting a graph that turned out to contain a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleAt(pub Handle);

/// Arc insertion into a node that cannot take it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArcError {
    Atomic,
    Duplicate(Symbol),
}

/// Mutable scratch graph with union-find node identity.
///
/// All destructive work (unification, structure building) happens here;
/// [`FeatureStructure`] values are only ever read from. Loading a structure
/// copies its nodes so the handle of node `n` is `base + n` where `base` is
/// the handle returned by [`Store::load`]. Buffers are kept across
/// [`Store::clear`], so a reused store stops allocating once warm.
#[derive(Default, Debug, Clone)]
pub struct Store {
    cells: Vec<Cell>,
    arcs: Vec<(Symbol, Handle)>,
    pending: Vec<(Handle, Handle)>,
    ids: Vec<usize>,
    open: Vec<bool>,
}

const UNSEEN: usize = usize::MAX;

thread_local! {
    static SCRATCH: std::cell::RefCell<Store> = std::cell::RefCell::default();
}

/// Runs `f` on this thread's cleared scratch store, so repeated parses
/// reuse one set of buffers. Nested calls get a fresh store.
pub fn with_scratch<R>(f: impl FnOnce(&mut Store) -> R) -> R {
    SCRATCH.with(|cell| match cell.try_borrow_mut() {
        Ok(mut store) => {
            store.clear();
            f(&mut store)
        }
        Err(_) => f(&mut Store::new()),
    })
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Store {
            cells: Vec::with_capacity(n),
            arcs: Vec::with_capacity(n),
            ..Store::default()
        }
    }

    pub fn clear(&mut self) {
        self.cells.clear();
        self.arcs.clear();
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn push(&mut self, kind: Kind) -> Handle {
        let h = self.cells.len();
        self.cells.push(Cell { parent: h, kind });
        h
    }

    pub fn new_top(&mut self) -> Handle {
        self.push(Kind::Top)
    }

    pub fn new_atom(&mut self, value: Symbol) -> Handle {
        self.push(Kind::Atom(value))
    }

    /// Copies `fs` into the store and returns the handle of its root.
    pub fn load(&mut self, fs: &FeatureStructure) -> Handle {
        let base = self.cells.len();
        self.cells.reserve(fs.nodes.len());
        for (i, node) in fs.nodes.iter().enumerate() {
            let kind = match node {
                Node::Top => Kind::Top,
                Node::Atom(s) => Kind::Atom(s.clone()),
                Node::Complex(arcs) => {
                    let start = self.arcs.len();
                    self.arcs.extend(arcs.iter().map(|(f, c)| (f.clone(), base + c)));
                    Kind::Complex { start, len: arcs.len() }
                }
            };
            self.cells.push(Cell {
                parent: base + i,
                kind,
            });
        }
        base
    }

    pub fn find(&mut self, mut x: Handle) -> Handle {
        let mut root = x;
        while self.cells[root].parent != root {
            root = self.cells[root].parent;
        }
        while self.cells[x].parent != root {
            let next = self.cells[x].parent;
            self.cells[x].parent = root;
            x = next;
        }
        root
    }

    fn arcs_of(&self, node: Handle) -> &[(Symbol, Handle)] {
        match self.cells[node].kind {
            Kind::Complex { start, len } => &self.arcs[start..start + len],
            _ => &[],
        }
    }

    /// Appends an arc to a complex representative, moving its arc block to
    /// the end of the arena unless it is already there.
    fn append_arc(&mut self, node: Handle, arc: (Symbol, Handle)) {
        let Kind::Complex { start, len } = self.cells[node].kind else {
            unreachable!("append_arc on a non-complex node")
        };
        let start = if start + len == self.arcs.len() {
            start
        } else {
            let fresh = self.arcs.len();
            self.arcs.extend_from_within(start..start + len);
            fresh
        };
        self.arcs.push(arc);
        self.cells[node].kind = Kind::Complex { start, len: len + 1 };
    }

    /// Adds arc `feature -> child` to `node`, turning a top node complex.
    pub fn add_arc(&mut self, node: Handle, feature: Symbol, child: Handle) -> Result<(), ArcError> {
        let node = self.find(node);
        match self.cells[node].kind {
            Kind::Top => {
                let start = self.arcs.len();
                self.arcs.push((feature, child));
                self.cells[node].kind = Kind::Complex { start, len: 1 };
                Ok(())
            }
            Kind::Atom(_) => Err(ArcError::Atomic),
            Kind::Complex { .. } => {
                if self.arcs_of(node).iter().any(|(f, _)| *f == feature) {
                    return Err(ArcError::Duplicate(feature));
                }
                self.append_arc(node, (feature, child));
                Ok(())
            }
        }
    }

    /// Makes a top node atomic. Returns false if the node is already
    /// complex or carries a different atom.
    pub fn set_atom(&mut self, node: Handle, value: Symbol) -> bool {
        let node = self.find(node);
        match &mut self.cells[node].kind {
            k @ Kind::Top => {
                *k = Kind::Atom(value);
                true
            }
            Kind::Atom(a) => *a == value,
            Kind::Complex { .. } => false,
        }
    }

    pub fn child(&mut self, node: Handle, feature: &str) -> Option<Handle> {
        let node = self.find(node);
        self.arcs_of(node)
            .iter()
            .find(|(f, _)| f.as_str() == feature)
            .map(|&(_, c)| c)
    }

    /// Destructively unifies the nodes `a` and `b`.
    ///
    /// On failure the store is left in an unspecified (but memory-safe)
    /// state and should be cleared before reuse.
    pub fn unify(&mut self, a: Handle, b: Handle) -> bool {
        let mut pending = std::mem::take(&mut self.pending);
        pending.clear();
        pending.push((a, b));
        let ok = self.unify_pending(&mut pending);
        self.pending = pending;
        ok
    }

    fn unify_pending(&mut self, pending: &mut Vec<(Handle, Handle)>) -> bool {
        while let Some((x, y)) = pending.pop() {
            let x = self.find(x);
            let y = self.find(y);
            if x == y {
                continue;
            }
            let kx = std::mem::replace(&mut self.cells[x].kind, Kind::Top);
            self.cells[x].parent = y;
            match kx {
                Kind::Top => {}
                Kind::Atom(s) => match &mut self.cells[y].kind {
                    k @ Kind::Top => *k = Kind::Atom(s),
                    Kind::Atom(t) if *t == s => {}
                    _ => return false,
                },
                Kind::Complex { start, len } => match self.cells[y].kind {
                    Kind::Top => self.cells[y].kind = Kind::Complex { start, len },
                    Kind::Atom(_) => return false,
                    Kind::Complex { .. } => {
                        // x's block is never moved while y grows.
                        for i in start..start + len {
                            let (f, cx) = self.arcs[i].clone();
                            match self.arcs_of(y).iter().find(|(g, _)| *g == f) {
                                Some(&(_, cy)) => pending.push((cx, cy)),
                                None => self.append_arc(y, (f, cx)),
                            }
                        }
                    }
                },
            }
        }
        true
    }

    pub fn extract(&mut self, root: Handle) -> Result<FeatureStructure, CycleAt> {
        self.extract_mapped(root, &[]).map(|(fs, _)| fs)
    }

    /// Copies the graph reachable from `root` out as a canonical structure.
    ///
    /// For every handle in `track`, the returned vector holds the id of the
    /// corresponding node in the result, or `None` if it is not reachable.
    pub fn extract_mapped(
        &mut self,
        root: Handle,
        track: &[Handle],
    ) -> Result<(FeatureStructure, Vec<Option<NodeId>>), CycleAt> {
        let mut ids = std::mem::take(&mut self.ids);
        let mut open = std::mem::take(&mut self.open);
        ids.clear();
        ids.resize(self.cells.len(), UNSEEN);
        open.clear();
        open.resize(self.cells.len(), false);
        let mut nodes = Vec::new();
        let root = self.find(root);
        let visited = self.visit(root, &mut ids, &mut open, &mut nodes);
        let mapped = track
            .iter()
            .map(|&h| {
                let r = self.find(h);
                (ids[r] != UNSEEN).then_some(ids[r])
            })
            .collect();
        self.ids = ids;
        self.open = open;
        visited?;
        Ok((FeatureStructure { nodes }, mapped))
    }

    fn visit(
        &mut self,
        rep: Handle,
        ids: &mut [usize],
        open: &mut [bool],
        nodes: &mut Vec<Node>,
    ) -> Result<NodeId, CycleAt> {
        if ids[rep] != UNSEEN {
            if open[rep] {
                return Err(CycleAt(rep));
            }
            return Ok(ids[rep]);
        }
        let id = nodes.len();
        ids[rep] = id;
        nodes.push(Node::Top);
        let (start, len) = match &self.cells[rep].kind {
            Kind::Top => return Ok(id),
            Kind::Atom(s) => {
                nodes[id] = Node::Atom(s.clone());
                return Ok(id);
            }
            Kind::Complex { start, len } => (*start, *len),
        };
        if len == 0 {
            return Ok(id);
        }
        // Sorting in place is harmless: arc order carries no meaning.
        self.arcs[start..start + len].sort_unstable_by(|a, b| a.0.cmp(&b.0));
        open[rep] = true;
        let mut out = Vec::with_capacity(len);
        for i in start..start + len {
            let (f, c) = self.arcs[i].clone();
            let c = self.find(c);
            out.push((f, self.visit(c, ids, open, nodes)?));
        }
        open[rep] = false;
        nodes[id] = Node::Complex(out);
        Ok(id)
    }
}
