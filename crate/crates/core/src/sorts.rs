//! Semantic sort hierarchy: the world-entity types that referential indices
//! range over.
//!
//! A hierarchy file is line oriented. Each line declares one sort and its
//! parents:
//!
//! ```text
//! # comment
//! ref:
//! physical: ref
//! male_tech: man, technician
//! ```
//!
//! The root is the one sort declared with no parents. Names are
//! case-insensitive and stored lowercase.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Handle to a sort of one particular [`SortHierarchy`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(u32);

impl Sort {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate sort `{sort}`")]
    DuplicateSort { line: usize, sort: String },
    #[error("line {line}: sort `{sort}` has undeclared parent `{parent}`")]
    UndeclaredParent {
        line: usize,
        sort: String,
        parent: String,
    },
    #[error("cycle in parent links through sort `{sort}`")]
    Cycle { sort: String },
    #[error("no root sort: every sort declares a parent")]
    NoRoot,
    #[error("more than one root sort: {}", roots.join(", "))]
    MultipleRoots { roots: Vec<String> },
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("sorts `{a}` and `{b}` have several maximal common subsorts: {}", bounds.join(", "))]
    AmbiguousMeet {
        a: String,
        b: String,
        bounds: Vec<String>,
    },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// A pair of sorts whose maximal lower bounds are not unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcpoViolation {
    pub a: Sort,
    pub b: Sort,
    pub bounds: Vec<Sort>,
}

/// Immutable DAG of sorts ordered by subsumption. The root is the most
/// general sort and plays the role of `ref`.
#[derive(Debug, Clone)]
pub struct SortHierarchy {
    names: Vec<String>,
    by_name: HashMap<String, Sort>,
    parents: Vec<Vec<Sort>>,
    root: Sort,
    // subsumes[a][b] holds when a = b or a is an ancestor of b
    subsumes: Vec<Vec<bool>>,
}

pub const BUNDLED_HIERARCHY: &str = include_str!("../data/world.sorts");

impl SortHierarchy {
    /// The bundled world-entity hierarchy.
    pub fn bundled() -> Self {
        BUNDLED_HIERARCHY
            .parse()
            .expect("bundled hierarchy is well formed")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, HierarchyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HierarchyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> Sort {
        self.root
    }

    pub fn sorts(&self) -> impl Iterator<Item = Sort> + '_ {
        (0..self.names.len() as u32).map(Sort)
    }

    pub fn name(&self, sort: Sort) -> &str {
        &self.names[sort.index()]
    }

    pub fn parents(&self, sort: Sort) -> &[Sort] {
        &self.parents[sort.index()]
    }

    pub fn get(&self, name: &str) -> Option<Sort> {
        self.by_name.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<Sort, HierarchyError> {
        self.get(name)
            .ok_or_else(|| HierarchyError::UnknownSort(name.to_string()))
    }

    /// True iff `a = b` or `a` is an ancestor of `b`.
    pub fn subsumes(&self, a: Sort, b: Sort) -> bool {
        self.subsumes[a.index()][b.index()]
    }

    pub fn subsumes_named(&self, a: &str, b: &str) -> Result<bool, HierarchyError> {
        Ok(self.subsumes(self.resolve(a)?, self.resolve(b)?))
    }

    /// Sorts subsumed by both `a` and `b` that have no strictly more general
    /// common lower bound. Empty means the two sorts conflict. Sorted by id.
    pub fn maximal_lower_bounds(&self, a: Sort, b: Sort) -> Vec<Sort> {
        if self.subsumes(a, b) {
            return vec![b];
        }
        if self.subsumes(b, a) {
            return vec![a];
        }
        let common: Vec<Sort> = self
            .sorts()
            .filter(|&s| self.subsumes(a, s) && self.subsumes(b, s))
            .collect();
        common
            .iter()
            .copied()
            .filter(|&s| !common.iter().any(|&t| t != s && self.subsumes(t, s)))
            .collect()
    }

    /// Greatest lower bound. `Ok(None)` means the sorts are inconsistent.
    pub fn glb(&self, a: Sort, b: Sort) -> Result<Option<Sort>, HierarchyError> {
        let bounds = self.maximal_lower_bounds(a, b);
        match bounds.len() {
            0 => Ok(None),
            1 => Ok(Some(bounds[0])),
            _ => Err(HierarchyError::AmbiguousMeet {
                a: self.name(a).to_string(),
                b: self.name(b).to_string(),
                bounds: bounds.iter().map(|&s| self.name(s).to_string()).collect(),
            }),
        }
    }

    /// Every unordered pair of consistent sorts without a unique meet.
    pub fn bcpo_violations(&self) -> Vec<BcpoViolation> {
        let mut out = Vec::new();
        for a in self.sorts() {
            for b in self.sorts().filter(|&b| b > a) {
                let bounds = self.maximal_lower_bounds(a, b);
                if bounds.len() > 1 {
                    out.push(BcpoViolation { a, b, bounds });
                }
            }
        }
        out
    }

    /// Fails with the first pair that lacks a unique meet.
    pub fn check_bcpo(&self) -> Result<(), HierarchyError> {
        match self.bcpo_violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(HierarchyError::AmbiguousMeet {
                a: self.name(v.a).to_string(),
                b: self.name(v.b).to_string(),
                bounds: v.bounds.iter().map(|&s| self.name(s).to_string()).collect(),
            }),
        }
    }

    fn build(decls: Vec<(usize, String, Vec<String>)>) -> Result<Self, HierarchyError> {
        let mut by_name = HashMap::new();
        let mut names = Vec::with_capacity(decls.len());
        for (line, name, _) in &decls {
            if by_name
                .insert(name.clone(), Sort(names.len() as u32))
                .is_some()
            {
                return Err(HierarchyError::DuplicateSort {
                    line: *line,
                    sort: name.clone(),
                });
            }
            names.push(name.clone());
        }

        let mut parents = Vec::with_capacity(decls.len());
        for (line, name, ps) in &decls {
            let mut resolved = Vec::with_capacity(ps.len());
            for p in ps {
                let sort =
                    by_name
                        .get(p)
                        .copied()
                        .ok_or_else(|| HierarchyError::UndeclaredParent {
                            line: *line,
                            sort: name.clone(),
                            parent: p.clone(),
                        })?;
                if !resolved.contains(&sort) {
                    resolved.push(sort);
                }
            }
            parents.push(resolved);
        }

        let order = topological_order(&parents).map_err(|s| HierarchyError::Cycle {
            sort: names[s.index()].clone(),
        })?;

        let roots: Vec<Sort> = (0..names.len() as u32)
            .map(Sort)
            .filter(|s| parents[s.index()].is_empty())
            .collect();
        let root = match roots.as_slice() {
            [] => return Err(HierarchyError::NoRoot),
            [r] => *r,
            _ => {
                return Err(HierarchyError::MultipleRoots {
                    roots: roots.iter().map(|s| names[s.index()].clone()).collect(),
                })
            }
        };

        // ancestors before descendants in `order`
        let n = names.len();
        let mut subsumes = vec![vec![false; n]; n];
        for &s in &order {
            subsumes[s.index()][s.index()] = true;
            for &p in &parents[s.index()] {
                for row in subsumes.iter_mut() {
                    if row[p.index()] {
                        row[s.index()] = true;
                    }
                }
            }
        }

        Ok(SortHierarchy {
            names,
            by_name,
            parents,
            root,
            subsumes,
        })
    }
}

/// Parents-first ordering, or the sort at which a cycle was found.
fn topological_order(parents: &[Vec<Sort>]) -> Result<Vec<Sort>, Sort> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        s: Sort,
        parents: &[Vec<Sort>],
        marks: &mut [Mark],
        out: &mut Vec<Sort>,
    ) -> Result<(), Sort> {
        match marks[s.index()] {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(s),
            Mark::New => {}
        }
        marks[s.index()] = Mark::Active;
        for &p in &parents[s.index()] {
            visit(p, parents, marks, out)?;
        }
        marks[s.index()] = Mark::Done;
        out.push(s);
        Ok(())
    }

    let mut marks = vec![Mark::New; parents.len()];
    let mut out = Vec::with_capacity(parents.len());
    for i in 0..parents.len() {
        visit(Sort(i as u32), parents, &mut marks, &mut out)?;
    }
    Ok(out)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl FromStr for SortHierarchy {
    type Err = HierarchyError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut decls = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (name, rest) = match text.split_once(':') {
                Some((n, r)) => (n.trim(), r.trim()),
                None => (text, ""),
            };
            let name = name.to_ascii_lowercase();
            if !is_identifier(&name) {
                return Err(HierarchyError::Syntax {
                    line,
                    message: format!("bad sort name `{name}`"),
                });
            }
            let mut ps = Vec::new();
            if !rest.is_empty() {
                for p in rest.split(',') {
                    let p = p.trim().to_ascii_lowercase();
                    if !is_identifier(&p) {
                        return Err(HierarchyError::Syntax {
                            line,
                            message: format!("bad parent name `{p}` for `{name}`"),
                        });
                    }
                    ps.push(p);
                }
            }
            decls.push((line, name, ps));
        }
        SortHierarchy::build(decls)
    }
}

impl fmt::Display for SortHierarchy {
    /// Writes the hierarchy back in file syntax, parents before children.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = topological_order(&self.parents).expect("validated at load");
        for s in order {
            let ps: Vec<&str> = self.parents(s).iter().map(|&p| self.name(p)).collect();
            writeln!(f, "{}: {}", self.name(s), ps.join(", "))?;
        }
        Ok(())
    }
}
