//! Typed feature structures with reentrancy.
//!
//! A [`FeatureStructure`] is an immutable rooted DAG kept in canonical form:
//! nodes are numbered in depth-first preorder from the root, visiting
//! features in name order. Two structures are isomorphic exactly when their
//! canonical forms are equal, so `==` is equality up to node identity.
//!
//! Mutation happens in a [`Workspace`], a union-find graph that several
//! structures can be imported into, unified at arbitrary nodes, and then
//! projected back out with [`Workspace::extract`].
//!
//! Node types come in three kinds. Semantic sorts meet through the
//! hierarchy's greatest lower bound; atoms (grammar-internal sorts such as
//! `sign`, relation names, list markers, literal strings) unify only with
//! themselves; `Top` unifies with anything.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::sorts::{HierarchyError, Sort, SortHierarchy};

pub const FIRST: &str = "FIRST";
pub const REST: &str = "REST";
pub const ELIST: &str = "elist";
pub const NELIST: &str = "nelist";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeType {
    Top,
    Sort(Sort),
    Atom(Arc<str>),
}

impl NodeType {
    pub fn atom(name: &str) -> Self {
        NodeType::Atom(Arc::from(name))
    }

    pub fn as_sort(&self) -> Option<Sort> {
        match self {
            NodeType::Sort(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            NodeType::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Type-level subsumption: `self` is at least as general as `other`.
    pub fn subsumes(&self, other: &NodeType, h: &SortHierarchy) -> bool {
        match (self, other) {
            (NodeType::Top, _) => true,
            (NodeType::Sort(a), NodeType::Sort(b)) => h.subsumes(*a, *b),
            (NodeType::Atom(a), NodeType::Atom(b)) => a == b,
            _ => false,
        }
    }

    pub fn render(&self, h: &SortHierarchy) -> String {
        match self {
            NodeType::Top => "*top*".to_string(),
            NodeType::Sort(s) => h.name(*s).to_string(),
            NodeType::Atom(a) => a.to_string(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    /// Ordinary unification failure.
    #[error("type clash at {path}: {left} vs {right}")]
    Clash {
        path: String,
        left: String,
        right: String,
    },
    #[error("unification would create a cycle")]
    Cycle,
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

impl UnifyError {
    pub fn is_clash(&self) -> bool {
        matches!(self, UnifyError::Clash { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    ty: NodeType,
    features: BTreeMap<Arc<str>, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    // canonical preorder; root is nodes[0]
    nodes: Vec<Node>,
}

impl FeatureStructure {
    /// A single featureless node.
    pub fn leaf(ty: NodeType) -> Self {
        FeatureStructure {
            nodes: vec![Node {
                ty,
                features: BTreeMap::new(),
            }],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn ty(&self, n: NodeId) -> &NodeType {
        &self.nodes[n.0].ty
    }

    pub fn features(&self, n: NodeId) -> impl Iterator<Item = (&str, NodeId)> {
        self.nodes[n.0]
            .features
            .iter()
            .map(|(f, &c)| (f.as_ref(), NodeId(c)))
    }

    pub fn feature(&self, n: NodeId, f: &str) -> Option<NodeId> {
        self.nodes[n.0].features.get(f).map(|&c| NodeId(c))
    }

    pub fn follow(&self, from: NodeId, path: &[&str]) -> Option<NodeId> {
        path.iter().try_fold(from, |n, f| self.feature(n, f))
    }

    pub fn get(&self, path: &[&str]) -> Option<NodeId> {
        self.follow(self.root(), path)
    }

    /// Items of a FIRST/REST list, or `None` if `n` is not a proper list.
    pub fn list_items(&self, n: NodeId) -> Option<Vec<NodeId>> {
        let mut out = Vec::new();
        let mut cur = n;
        loop {
            match self.ty(cur).as_atom() {
                Some(ELIST) => return Some(out),
                Some(NELIST) => {
                    out.push(self.feature(cur, FIRST)?);
                    cur = self.feature(cur, REST)?;
                }
                _ => return None,
            }
        }
    }

    /// Number of features pointing at each node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for node in &self.nodes {
            for &c in node.features.values() {
                deg[c] += 1;
            }
        }
        deg
    }

    /// Least structure subsumed by both, or the reason there is none.
    /// Neither input is modified.
    pub fn unify(
        &self,
        other: &FeatureStructure,
        h: &SortHierarchy,
    ) -> Result<FeatureStructure, UnifyError> {
        let mut ws = Workspace::new();
        let a = ws.import(self);
        let b = ws.import(other);
        ws.unify(a, b, h)?;
        ws.extract(a)
    }

    /// True iff every path and reentrancy of `self` is present in `other`
    /// with a type at least as specific.
    pub fn subsumes(&self, other: &FeatureStructure, h: &SortHierarchy) -> bool {
        let mut map: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        while let Some((a, b)) = stack.pop() {
            match map[a] {
                Some(m) if m == b => continue,
                Some(_) => return false,
                None => map[a] = Some(b),
            }
            let (na, nb) = (&self.nodes[a], &other.nodes[b]);
            if !na.ty.subsumes(&nb.ty, h) {
                return false;
            }
            for (f, &ca) in &na.features {
                match nb.features.get(f) {
                    Some(&cb) => stack.push((ca, cb)),
                    None => return false,
                }
            }
        }
        true
    }

    /// Copy with every atom directly under a `feature` arc replaced by
    /// `rewrite(atom)`.
    pub fn rewrite_atoms(&self, feature: &str, rewrite: impl Fn(&str) -> String) -> Self {
        let mut out = self.clone();
        for i in 0..self.nodes.len() {
            if let Some(&c) = self.nodes[i].features.get(feature) {
                if let NodeType::Atom(a) = &self.nodes[c].ty {
                    out.nodes[c].ty = NodeType::atom(&rewrite(a));
                }
            }
        }
        out
    }

    pub fn display<'a>(&'a self, h: &'a SortHierarchy) -> AvmDisplay<'a> {
        AvmDisplay { fs: self, h }
    }
}

#[derive(Clone, Debug, Default)]
struct WNode {
    ty: Option<NodeType>,
    features: BTreeMap<Arc<str>, usize>,
}

/// Mutable graph for building structures and unifying their nodes in place.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    nodes: Vec<WNode>,
    forward: Vec<usize>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, ty: NodeType) -> NodeId {
        self.nodes.push(WNode {
            ty: Some(ty),
            features: BTreeMap::new(),
        });
        self.forward.push(self.forward.len());
        NodeId(self.nodes.len() - 1)
    }

    pub fn top(&mut self) -> NodeId {
        self.node(NodeType::Top)
    }

    pub fn atom(&mut self, name: &str) -> NodeId {
        self.node(NodeType::atom(name))
    }

    pub fn sort(&mut self, sort: Sort) -> NodeId {
        self.node(NodeType::Sort(sort))
    }

    pub fn set(&mut self, parent: NodeId, feature: &str, child: NodeId) {
        let p = self.deref(parent).0;
        self.nodes[p].features.insert(Arc::from(feature), child.0);
    }

    /// Builds a FIRST/REST list over `items`.
    pub fn list(&mut self, items: &[NodeId]) -> NodeId {
        let mut tail = self.atom(ELIST);
        for &item in items.iter().rev() {
            let cell = self.atom(NELIST);
            self.set(cell, FIRST, item);
            self.set(cell, REST, tail);
            tail = cell;
        }
        tail
    }

    pub fn list_items(&self, n: NodeId) -> Option<Vec<NodeId>> {
        let mut out = Vec::new();
        let mut cur = self.deref(n);
        loop {
            match self.ty(cur).as_atom() {
                Some(ELIST) => return Some(out),
                Some(NELIST) => {
                    out.push(self.feature(cur, FIRST)?);
                    cur = self.feature(cur, REST)?;
                }
                _ => return None,
            }
        }
    }

    /// Copies `fs` in and returns its root.
    pub fn import(&mut self, fs: &FeatureStructure) -> NodeId {
        let base = self.nodes.len();
        for node in &fs.nodes {
            self.nodes.push(WNode {
                ty: Some(node.ty.clone()),
                features: node
                    .features
                    .iter()
                    .map(|(f, &c)| (f.clone(), c + base))
                    .collect(),
            });
            self.forward.push(self.forward.len());
        }
        NodeId(base)
    }

    pub fn deref(&self, n: NodeId) -> NodeId {
        let mut i = n.0;
        while self.forward[i] != i {
            i = self.forward[i];
        }
        NodeId(i)
    }

    pub fn ty(&self, n: NodeId) -> &NodeType {
        self.nodes[self.deref(n).0]
            .ty
            .as_ref()
            .expect("representative has a type")
    }

    pub fn feature(&self, n: NodeId, f: &str) -> Option<NodeId> {
        self.nodes[self.deref(n).0]
            .features
            .get(f)
            .map(|&c| self.deref(NodeId(c)))
    }

    pub fn features(&self, n: NodeId) -> Vec<(Arc<str>, NodeId)> {
        self.nodes[self.deref(n).0]
            .features
            .iter()
            .map(|(f, &c)| (f.clone(), self.deref(NodeId(c))))
            .collect()
    }

    pub fn follow(&self, from: NodeId, path: &[&str]) -> Option<NodeId> {
        path.iter()
            .try_fold(self.deref(from), |n, f| self.feature(n, f))
    }

    pub fn same(&self, a: NodeId, b: NodeId) -> bool {
        self.deref(a) == self.deref(b)
    }

    /// Destructively unifies two nodes. On failure the workspace is left in
    /// an unspecified state and should be discarded.
    pub fn unify(&mut self, a: NodeId, b: NodeId, h: &SortHierarchy) -> Result<(), UnifyError> {
        let mut path = Vec::new();
        self.unify_at(a.0, b.0, h, &mut path)
    }

    fn unify_at(
        &mut self,
        a: usize,
        b: usize,
        h: &SortHierarchy,
        path: &mut Vec<Arc<str>>,
    ) -> Result<(), UnifyError> {
        let a = self.deref(NodeId(a)).0;
        let b = self.deref(NodeId(b)).0;
        if a == b {
            return Ok(());
        }
        let ta = self.nodes[a].ty.take().expect("representative has a type");
        let tb = self.nodes[b].ty.take().expect("representative has a type");
        let met = match meet(&ta, &tb, h)? {
            Some(t) => t,
            None => {
                let path = if path.is_empty() {
                    "<root>".to_string()
                } else {
                    path.iter()
                        .map(|f| f.as_ref())
                        .collect::<Vec<_>>()
                        .join("|")
                };
                return Err(UnifyError::Clash {
                    path,
                    left: ta.render(h),
                    right: tb.render(h),
                });
            }
        };
        self.nodes[a].ty = Some(met);
        self.forward[b] = a;
        let moved = std::mem::take(&mut self.nodes[b].features);
        for (f, bc) in moved {
            let ra = self.deref(NodeId(a)).0;
            match self.nodes[ra].features.get(&f).copied() {
                Some(ac) => {
                    path.push(f);
                    self.unify_at(ac, bc, h, path)?;
                    path.pop();
                }
                None => {
                    self.nodes[ra].features.insert(f, bc);
                }
            }
        }
        Ok(())
    }

    /// Canonical copy of everything reachable from `root`.
    pub fn extract(&self, root: NodeId) -> Result<FeatureStructure, UnifyError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done(usize),
        }
        let mut marks = vec![Mark::New; self.nodes.len()];
        let mut out: Vec<Node> = Vec::new();

        // explicit stack: (workspace node, index into its feature list)
        type Frame = (usize, usize, Vec<(Arc<str>, usize)>);
        let start = self.deref(root).0;
        let mut stack: Vec<Frame> = Vec::new();
        let enter = |n: usize, marks: &mut Vec<Mark>, out: &mut Vec<Node>| {
            let id = out.len();
            marks[n] = Mark::Active;
            out.push(Node {
                ty: self.nodes[n].ty.clone().expect("representative has a type"),
                features: BTreeMap::new(),
            });
            let feats: Vec<(Arc<str>, usize)> = self.nodes[n]
                .features
                .iter()
                .map(|(f, &c)| (f.clone(), self.deref(NodeId(c)).0))
                .collect();
            (n, id, feats)
        };
        let first = enter(start, &mut marks, &mut out);
        stack.push(first);
        while let Some((n, id, feats)) = stack.last_mut() {
            match feats.first().cloned() {
                None => {
                    let (n, id) = (*n, *id);
                    marks[n] = Mark::Done(id);
                    stack.pop();
                }
                Some((f, c)) => {
                    let parent = *id;
                    match marks[c] {
                        Mark::Active => return Err(UnifyError::Cycle),
                        Mark::Done(cid) => {
                            out[parent].features.insert(f, cid);
                            feats.remove(0);
                        }
                        Mark::New => {
                            let cid = out.len();
                            out[parent].features.insert(f, cid);
                            feats.remove(0);
                            let frame = enter(c, &mut marks, &mut out);
                            stack.push(frame);
                        }
                    }
                }
            }
        }
        Ok(FeatureStructure { nodes: out })
    }
}

fn meet(a: &NodeType, b: &NodeType, h: &SortHierarchy) -> Result<Option<NodeType>, UnifyError> {
    Ok(match (a, b) {
        (NodeType::Top, t) | (t, NodeType::Top) => Some(t.clone()),
        (NodeType::Sort(x), NodeType::Sort(y)) => h.glb(*x, *y)?.map(NodeType::Sort),
        (NodeType::Atom(x), NodeType::Atom(y)) if x == y => Some(a.clone()),
        _ => None,
    })
}

/// Indented attribute-value rendering; shared nodes are tagged `#n`.
pub struct AvmDisplay<'a> {
    fs: &'a FeatureStructure,
    h: &'a SortHierarchy,
}

impl AvmDisplay<'_> {
    fn write_node(
        &self,
        out: &mut String,
        n: usize,
        indent: usize,
        tags: &[Option<usize>],
        seen: &mut [bool],
    ) {
        let fs = self.fs;
        if let Some(t) = tags[n] {
            write!(out, "#{t}").unwrap();
            if seen[n] {
                return;
            }
            out.push(' ');
        }
        seen[n] = true;
        let node = &fs.nodes[n];

        if let Some(items) = self.plain_list(n, tags) {
            let simple = items
                .iter()
                .all(|&i| fs.nodes[i].features.is_empty() && tags[i].is_none());
            if items.is_empty() {
                out.push_str("< >");
            } else if simple {
                let parts: Vec<String> = items
                    .iter()
                    .map(|&i| fs.nodes[i].ty.render(self.h))
                    .collect();
                write!(out, "< {} >", parts.join(", ")).unwrap();
            } else {
                out.push_str("<\n");
                for &i in &items {
                    pad(out, indent + 1);
                    self.write_node(out, i, indent + 1, tags, seen);
                    out.push('\n');
                }
                pad(out, indent);
                out.push('>');
            }
            return;
        }

        out.push_str(&node.ty.render(self.h));
        if node.features.is_empty() {
            return;
        }
        out.push_str(" [\n");
        for (f, &c) in &node.features {
            pad(out, indent + 1);
            write!(out, "{f}: ").unwrap();
            self.write_node(out, c, indent + 1, tags, seen);
            out.push('\n');
        }
        pad(out, indent);
        out.push(']');
    }

    // a list whose spine cells are not shared
    fn plain_list(&self, n: usize, tags: &[Option<usize>]) -> Option<Vec<usize>> {
        let fs = self.fs;
        let mut items = Vec::new();
        let mut cur = n;
        loop {
            if cur != n && tags[cur].is_some() {
                return None;
            }
            let node = &fs.nodes[cur];
            match node.ty.as_atom() {
                Some(ELIST) if node.features.is_empty() => return Some(items),
                Some(NELIST) if node.features.len() == 2 => {
                    items.push(*node.features.get(FIRST)?);
                    cur = *node.features.get(REST)?;
                }
                _ => return None,
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

impl fmt::Display for AvmDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = self.fs.in_degrees();
        let mut next = 0;
        let tags: Vec<Option<usize>> = deg
            .iter()
            .map(|&d| {
                (d > 1).then(|| {
                    next += 1;
                    next
                })
            })
            .collect();
        let mut seen = vec![false; self.fs.nodes.len()];
        let mut out = String::new();
        self.write_node(&mut out, 0, 0, &tags, &mut seen);
        f.write_str(&out)
    }
}
