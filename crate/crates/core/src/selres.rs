//! Post-parse checking of BG restrictions.
//!
//! A reading's single-role qfpsoas whose relation names a sort of the
//! hierarchy are constraints `sort(var)` on its indices. Two constraints on
//! one variable merge into one per maximal common subsort; the reading is
//! free of violations iff every variable can be reduced to a single
//! constraint this way.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::grammar::{feat, Sign};
use crate::parser::Reading;
use crate::sorts::{Sort, SortHierarchy};
use crate::tfs::NodeId;

/// A semantic variable: one index node of a reading, numbered from 1 in
/// order of the words that introduced it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintAtom {
    pub sort: Sort,
    pub var: Var,
    /// Contributing words, as `word@position` when known.
    pub sources: Vec<String>,
}

impl ConstraintAtom {
    pub fn new(sort: Sort, var: Var) -> Self {
        ConstraintAtom {
            sort,
            var,
            sources: Vec::new(),
        }
    }

    pub fn render(&self, h: &SortHierarchy) -> String {
        format!("{}({})", h.name(self.sort), self.var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Satisfiable {
        assignment: BTreeMap<Var, Sort>,
    },
    Violation {
        var: Var,
        /// Sorted by name.
        conflicting: Vec<Sort>,
        narrative: String,
    },
}

impl SolveResult {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, SolveResult::Satisfiable { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot merge constraints on different variables {0} and {1}")]
pub struct VarMismatch(pub Var, pub Var);

/// Numbers the index nodes of a sign. Indices of nominals come first, in
/// order of token position; any others follow in node order.
pub fn variables(sign: &Sign) -> BTreeMap<NodeId, Var> {
    let fs = sign.fs();
    let mut keyed: Vec<(usize, NodeId)> = fs
        .nodes()
        .filter(|&n| fs.ty(n).as_sort().is_some())
        .map(|n| {
            let pos = fs
                .feature(n, feat::ANCHOR)
                .and_then(|a| fs.ty(a).as_atom())
                .and_then(position)
                .unwrap_or(usize::MAX);
            (pos, n)
        })
        .collect();
    keyed.sort();
    keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, n))| (n, Var(i + 1)))
        .collect()
}

fn position(tagged: &str) -> Option<usize> {
    tagged.rsplit_once('@').and_then(|(_, p)| p.parse().ok())
}

fn word_of(tagged: &str) -> &str {
    tagged.rsplit_once('@').map_or(tagged, |(w, _)| w)
}

/// Constraint atoms of a sign, from BG, QUANTS and CONT|RESTR. Atoms with the
/// same sort and variable are reported once, with their sources merged.
pub fn extract_from_sign(sign: &Sign, h: &SortHierarchy) -> Vec<ConstraintAtom> {
    let vars = variables(sign);
    let mut out: Vec<ConstraintAtom> = Vec::new();
    let candidates = sign
        .bg()
        .into_iter()
        .chain(sign.quants())
        .chain(sign.restr());
    for q in candidates {
        let Some((rel, roles)) = sign.qfpsoa(q) else {
            continue;
        };
        let [(_, filler)] = roles.as_slice() else {
            continue;
        };
        let (Some(sort), Some(&var)) = (h.get(rel), vars.get(filler)) else {
            continue;
        };
        let sources = sign.sources(q);
        let atom = match out.iter().position(|a| a.sort == sort && a.var == var) {
            Some(i) => &mut out[i],
            None => {
                out.push(ConstraintAtom::new(sort, var));
                out.last_mut().expect("just pushed")
            }
        };
        for s in sources {
            if !atom.sources.iter().any(|x| x == s) {
                atom.sources.push(s.to_string());
            }
        }
    }
    out
}

pub fn extract_constraints(reading: &Reading, h: &SortHierarchy) -> Vec<ConstraintAtom> {
    extract_from_sign(&reading.sign, h)
}

/// Sorts of the index nodes themselves, per variable.
pub fn index_sorts(sign: &Sign) -> BTreeMap<Var, Sort> {
    let fs = sign.fs();
    variables(sign)
        .into_iter()
        .map(|(n, v)| (v, fs.ty(n).as_sort().expect("variables are sorted nodes")))
        .collect()
}

/// One candidate per maximal lower bound of the two sorts; empty on
/// conflict.
pub fn merge_pair(
    c1: &ConstraintAtom,
    c2: &ConstraintAtom,
    h: &SortHierarchy,
) -> Result<Vec<ConstraintAtom>, VarMismatch> {
    if c1.var != c2.var {
        return Err(VarMismatch(c1.var, c2.var));
    }
    let mut sources = c1.sources.clone();
    for s in &c2.sources {
        if !sources.contains(s) {
            sources.push(s.clone());
        }
    }
    Ok(h.maximal_lower_bounds(c1.sort, c2.sort)
        .into_iter()
        .map(|sort| ConstraintAtom {
            sort,
            var: c1.var,
            sources: sources.clone(),
        })
        .collect())
}

/// Folds the sorts constraining one variable, branching over every maximal
/// lower bound. Returns the most general surviving candidates, sorted by id;
/// empty means the constraints cannot be met together.
pub fn solve_variable(sorts: &[Sort], h: &SortHierarchy) -> Vec<Sort> {
    let Some((&first, rest)) = sorts.split_first() else {
        return Vec::new();
    };
    let mut candidates = vec![first];
    for &next in rest {
        let mut merged: Vec<Sort> = Vec::new();
        for &c in &candidates {
            for m in h.maximal_lower_bounds(c, next) {
                if !merged.contains(&m) {
                    merged.push(m);
                }
            }
        }
        // a candidate below another adds nothing
        candidates = merged
            .iter()
            .copied()
            .filter(|&s| !merged.iter().any(|&t| t != s && h.subsumes(t, s)))
            .collect();
        if candidates.is_empty() {
            break;
        }
    }
    candidates.sort();
    candidates
}

/// Reduces each variable's constraints to one. Variables are examined in
/// order, and the first one that cannot be reduced is reported.
pub fn solve(atoms: &[ConstraintAtom], h: &SortHierarchy) -> SolveResult {
    let mut by_var: BTreeMap<Var, Vec<&ConstraintAtom>> = BTreeMap::new();
    for a in atoms {
        by_var.entry(a.var).or_default().push(a);
    }

    let mut assignment = BTreeMap::new();
    for (var, group) in by_var {
        let mut sorts: Vec<Sort> = group.iter().map(|a| a.sort).collect();
        sorts.sort();
        sorts.dedup();
        let candidates = solve_variable(&sorts, h);
        match candidates
            .iter()
            .min_by(|a, b| h.name(**a).cmp(h.name(**b)))
        {
            Some(&pick) => {
                assignment.insert(var, pick);
            }
            None => {
                let conflicting = conflicting_sorts(&sorts, h);
                let narrative = narrative(var, &conflicting, &group, h);
                return SolveResult::Violation {
                    var,
                    conflicting,
                    narrative,
                };
            }
        }
    }
    SolveResult::Satisfiable { assignment }
}

/// The first pair (by name) with no common subsort, or every sort when each
/// pair is consistent on its own.
fn conflicting_sorts(sorts: &[Sort], h: &SortHierarchy) -> Vec<Sort> {
    let mut named: Vec<Sort> = sorts.to_vec();
    named.sort_by(|a, b| h.name(*a).cmp(h.name(*b)));
    for (i, &a) in named.iter().enumerate() {
        for &b in &named[i + 1..] {
            if h.maximal_lower_bounds(a, b).is_empty() {
                return vec![a, b];
            }
        }
    }
    named
}

fn narrative(
    var: Var,
    conflicting: &[Sort],
    group: &[&ConstraintAtom],
    h: &SortHierarchy,
) -> String {
    let sorts: Vec<&str> = conflicting.iter().map(|&s| h.name(s)).collect();
    let words: Vec<String> = conflicting
        .iter()
        .map(|&s| {
            let mut ws: Vec<&str> = Vec::new();
            for a in group.iter().filter(|a| a.sort == s) {
                for src in &a.sources {
                    let w = word_of(src);
                    if !ws.contains(&w) {
                        ws.push(w);
                    }
                }
            }
            ws.join("+")
        })
        .collect();
    format!(
        "violation: var={var} sorts={} from={}",
        sorts.join(","),
        words.join(",")
    )
}

/// Extraction followed by solving.
pub fn check_reading(reading: &Reading, h: &SortHierarchy) -> SolveResult {
    solve(&extract_constraints(reading, h), h)
}
