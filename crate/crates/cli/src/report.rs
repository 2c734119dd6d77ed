use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use hpsg_selres::parser::{ParseError, ParseOutcome, Reading, ReadingId};
use hpsg_selres::selres::{self, SolveResult, Var};
use hpsg_selres::{tokenize, Grammar, Method, Parser, SortHierarchy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Bg,
    Index,
    Both,
}

impl MethodArg {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodArg::Bg => "bg",
            MethodArg::Index => "index",
            MethodArg::Both => "both",
        }
    }
}

/// One surviving reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingOut {
    pub derivation: String,
    pub senses: Vec<String>,
    /// Sort per variable: the solved assignment under bg, the index sorts
    /// under index.
    pub sorts: BTreeMap<String, String>,
    pub bg: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avm: Option<String>,
}

/// One reading rejected by the background check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationOut {
    pub derivation: String,
    pub senses: Vec<String>,
    pub var: usize,
    pub sorts: Vec<String>,
    pub narrative: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<String>>,
}

/// Results of one method on one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodOut {
    pub pre_filter: usize,
    pub post_filter: usize,
    pub readings: Vec<ReadingOut>,
    pub violations: Vec<ViolationOut>,
    pub edges: usize,
    pub saturated_edges: usize,
}

/// One JSON line per sentence. With `method: "both"` the top-level
/// counts, readings and violations are those of the bg method and the
/// index results sit under `index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub sentence: String,
    pub method: String,
    pub pre_filter: usize,
    pub post_filter: usize,
    pub readings: Vec<ReadingOut>,
    pub violations: Vec<ViolationOut>,
    pub edges: usize,
    pub saturated_edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<MethodOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl Record {
    /// Surviving reading counts that a batch expectation must hold for.
    pub fn surviving(&self) -> Vec<usize> {
        let mut v = vec![self.post_filter];
        if let Some(i) = &self.index {
            v.push(i.post_filter);
        }
        v
    }
}

fn var_name(v: Var) -> String {
    v.to_string()
}

fn bg_strings(r: &Reading) -> Vec<String> {
    let vars = selres::variables(&r.sign);
    let name = |n| vars.get(&n).map_or("_".to_string(), |v| var_name(*v));
    r.sign
        .bg()
        .into_iter()
        .map(|q| r.sign.render_qfpsoa(q, &name))
        .collect()
}

fn sort_map(h: &SortHierarchy, m: &BTreeMap<Var, hpsg_selres::Sort>) -> BTreeMap<String, String> {
    m.iter()
        .map(|(v, s)| (var_name(*v), h.name(*s).to_string()))
        .collect()
}

fn run_method(
    parser: &Parser,
    tokens: &[String],
    unchecked: &ParseOutcome,
    method: Method,
    explain: bool,
) -> Result<(MethodOut, BTreeSet<ReadingId>), ParseError> {
    let h = &parser.grammar().hierarchy;
    let mut readings = Vec::new();
    let mut violations = Vec::new();
    let mut ids = BTreeSet::new();
    let avm = |r: &Reading| explain.then(|| r.sign.display(h).to_string());

    let chart = match method {
        Method::Bg => {
            for r in &unchecked.readings {
                match selres::check_reading(r, h) {
                    SolveResult::Satisfiable { assignment } => {
                        ids.insert(r.id());
                        readings.push(ReadingOut {
                            derivation: r.derivation.clone(),
                            senses: r.senses.clone(),
                            sorts: sort_map(h, &assignment),
                            bg: bg_strings(r),
                            avm: avm(r),
                        });
                    }
                    SolveResult::Violation {
                        var,
                        conflicting,
                        narrative,
                    } => {
                        let constraints = explain.then(|| {
                            selres::extract_constraints(r, h)
                                .iter()
                                .map(|a| a.render(h))
                                .collect()
                        });
                        violations.push(ViolationOut {
                            derivation: r.derivation.clone(),
                            senses: r.senses.clone(),
                            var: var.0,
                            sorts: conflicting.iter().map(|&s| h.name(s).to_string()).collect(),
                            narrative,
                            constraints,
                        });
                    }
                }
            }
            None
        }
        Method::Index => {
            let out = parser.parse(tokens, Method::Index)?;
            for r in &out.readings {
                ids.insert(r.id());
                readings.push(ReadingOut {
                    derivation: r.derivation.clone(),
                    senses: r.senses.clone(),
                    sorts: sort_map(h, &selres::index_sorts(&r.sign)),
                    bg: bg_strings(r),
                    avm: avm(r),
                });
            }
            Some(out)
        }
    };
    let chart = chart.as_ref().unwrap_or(unchecked);
    Ok((
        MethodOut {
            pre_filter: unchecked.readings.len(),
            post_filter: readings.len(),
            readings,
            violations,
            edges: chart.edge_count(),
            saturated_edges: chart.saturated_edge_count(),
        },
        ids,
    ))
}

/// Parses one sentence under the requested method(s).
pub fn analyse(
    grammar: &Grammar,
    sentence: &str,
    method: MethodArg,
    explain: bool,
) -> Result<Record, ParseError> {
    let parser = Parser::new(grammar);
    let tokens = tokenize(sentence);
    let unchecked = parser.parse(&tokens, Method::Bg)?;
    let primary = match method {
        MethodArg::Index => Method::Index,
        _ => Method::Bg,
    };
    let (main, main_ids) = run_method(&parser, &tokens, &unchecked, primary, explain)?;
    let (index, agreement) = if method == MethodArg::Both {
        let (index, index_ids) = run_method(&parser, &tokens, &unchecked, Method::Index, explain)?;
        (Some(index), Some(main_ids == index_ids))
    } else {
        (None, None)
    };
    Ok(Record {
        sentence: tokens.join(" "),
        method: method.as_str().to_string(),
        pre_filter: main.pre_filter,
        post_filter: main.post_filter,
        readings: main.readings,
        violations: main.violations,
        edges: main.edges,
        saturated_edges: main.saturated_edges,
        index,
        agreement,
        expect: None,
        pass: None,
    })
}

fn write_method(out: &mut String, label: &str, m: &MethodOut) {
    let _ = writeln!(
        out,
        "[{label}] pre_filter={} post_filter={} edges={} saturated={}",
        m.pre_filter, m.post_filter, m.edges, m.saturated_edges
    );
    for (i, r) in m.readings.iter().enumerate() {
        let _ = writeln!(out, "  reading {}: {}", i + 1, r.derivation);
        let _ = writeln!(out, "    senses: {}", r.senses.join(" "));
        let sorts: Vec<String> = r.sorts.iter().map(|(v, s)| format!("{v}={s}")).collect();
        let _ = writeln!(out, "    sorts: {}", sorts.join(" "));
        if !r.bg.is_empty() {
            let _ = writeln!(out, "    bg: {}", r.bg.join(" "));
        }
        if let Some(avm) = &r.avm {
            for line in avm.lines() {
                let _ = writeln!(out, "    {line}");
            }
        }
    }
    for v in &m.violations {
        let _ = writeln!(out, "  {}", v.narrative);
        let _ = writeln!(out, "    in {}", v.derivation);
        if let Some(c) = &v.constraints {
            let _ = writeln!(out, "    constraints: {}", c.join(" "));
        }
    }
}

/// Human-readable report.
pub fn render_text(r: &Record) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sentence: {}", r.sentence);
    let main = MethodOut {
        pre_filter: r.pre_filter,
        post_filter: r.post_filter,
        readings: r.readings.clone(),
        violations: r.violations.clone(),
        edges: r.edges,
        saturated_edges: r.saturated_edges,
    };
    let label = if r.method == "index" { "index" } else { "bg" };
    write_method(&mut out, label, &main);
    if let Some(index) = &r.index {
        write_method(&mut out, "index", index);
    }
    if let Some(a) = r.agreement {
        let _ = writeln!(out, "agreement: {}", if a { "yes" } else { "no" });
    }
    out
}
