//! Bottom-up chart parser over a small fixed schema set.
//!
//! Every analysis is an explicit edge tree; nothing is packed. Each phrase's
//! BG is the union of its daughters' BG, and under [`Method::Index`] the
//! unification of a dependent with a valence slot is where sort conflicts on
//! indices prune the chart.
//!
//! Schemas:
//!
//! ```text
//! S    -> NP VP          head-subject
//! S    -> VP             imperative, VP with empty SUBJ
//! VP   -> V NP           head-complement (V while complements remain)
//! VP   -> V              no complements
//! PP   -> P NP           head-complement
//! NP   -> ProperN
//! NP   -> Det N'
//! NP   -> NP PP          modifier
//! NP   -> NP RelC        modifier
//! N'   -> N
//! N'   -> Adj N'         modifier
//! RelC -> RelPro VP      relative pronoun index = VP subject index
//! ```

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::grammar::{feat, Grammar, Method, Pos, Sign};
use crate::selres::{self, SolveResult};
use crate::tfs::{NodeId, NodeType, UnifyError, Workspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown token{}: {}", if .0.len() == 1 { "" } else { "s" }, .0.join(", "))]
    UnknownTokens(Vec<String>),
    #[error("unification fault: {0}")]
    Unify(UnifyError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cat {
    S,
    Np,
    NBar,
    Vp,
    Pp,
    RelC,
    V,
    N,
    ProperN,
    Det,
    P,
    RelPro,
    Adj,
}

impl Cat {
    pub fn of_pos(pos: Pos) -> Cat {
        match pos {
            Pos::Verb => Cat::V,
            Pos::Noun => Cat::N,
            Pos::ProperNoun => Cat::ProperN,
            Pos::Determiner => Cat::Det,
            Pos::Preposition => Cat::P,
            Pos::RelativePronoun => Cat::RelPro,
            Pos::Adjective => Cat::Adj,
        }
    }
}

impl fmt::Display for Cat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cat::S => "S",
            Cat::Np => "NP",
            Cat::NBar => "N'",
            Cat::Vp => "VP",
            Cat::Pp => "PP",
            Cat::RelC => "RelC",
            Cat::V => "V",
            Cat::N => "N",
            Cat::ProperN => "ProperN",
            Cat::Det => "Det",
            Cat::P => "P",
            Cat::RelPro => "RelPro",
            Cat::Adj => "Adj",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Schema {
    Lexical,
    HeadSubject,
    Imperative,
    HeadComplement,
    NoComplements,
    ProperNp,
    DetNp,
    NounBar,
    AdjBar,
    PpModifier,
    RelModifier,
    RelClause,
}

impl Schema {
    /// Whether the head daughter is the left one (binary schemas only).
    pub fn head_is_left(self) -> bool {
        matches!(
            self,
            Schema::HeadComplement | Schema::PpModifier | Schema::RelModifier
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexRef {
    pub word: String,
    pub sense: String,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: usize,
    pub start: usize,
    pub end: usize,
    pub cat: Cat,
    pub sign: Sign,
    pub schema: Schema,
    pub children: Vec<usize>,
    pub lexical: Option<LexRef>,
}

impl Edge {
    pub fn is_saturated(&self) -> bool {
        self.sign.subj().is_empty() && self.sign.comps().is_empty()
    }
}

/// One complete analysis of a sentence.
#[derive(Debug, Clone)]
pub struct Reading {
    pub sign: Sign,
    pub derivation: String,
    pub senses: Vec<String>,
    pub method: Method,
    pub edge: usize,
}

/// Identity of a reading across methods: tree shape plus word senses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReadingId {
    pub derivation: String,
    pub senses: Vec<String>,
}

impl Reading {
    pub fn id(&self) -> ReadingId {
        ReadingId {
            derivation: self.derivation.clone(),
            senses: self.senses.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub method: Method,
    pub tokens: Vec<String>,
    pub edges: Vec<Edge>,
    pub readings: Vec<Reading>,
    /// Binary combinations rejected by unification.
    pub failed_unifications: usize,
}

impl ParseOutcome {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges with empty SUBJ and COMPS.
    pub fn saturated_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_saturated()).count()
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Bracketed rendering of the tree rooted at `id`, e.g.
    /// `(S (NP Tom) (VP ate (NP a keyboard)))`. N' nodes are not shown.
    pub fn derivation(&self, id: usize) -> String {
        render_tree(&self.edges, id)
    }

    fn senses(&self, id: usize) -> Vec<String> {
        let mut leaves = Vec::new();
        collect_leaves(&self.edges, id, &mut leaves);
        leaves.sort_by_key(|e| e.start);
        leaves
            .into_iter()
            .map(|e| e.lexical.as_ref().expect("leaf").sense.clone())
            .collect()
    }
}

fn render_tree(edges: &[Edge], id: usize) -> String {
    let e = &edges[id];
    if let Some(lex) = &e.lexical {
        return lex.word.clone();
    }
    let inner: Vec<String> = e.children.iter().map(|&c| render_tree(edges, c)).collect();
    if e.cat == Cat::NBar {
        inner.join(" ")
    } else {
        format!("({} {})", e.cat, inner.join(" "))
    }
}

fn collect_leaves<'a>(edges: &'a [Edge], id: usize, out: &mut Vec<&'a Edge>) {
    let e = &edges[id];
    if e.lexical.is_some() {
        out.push(e);
    }
    for &c in &e.children {
        collect_leaves(edges, c, out);
    }
}

/// Lowercases, splits on whitespace and strips punctuation from token ends.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|t| {
            t.trim_end_matches(['.', ',', '!', '?', ';', ':'])
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Pre- and post-filter reading counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseCounts {
    /// Readings with selectional checking off: bare `ref` indices, BG unchecked.
    pub pre_filter: usize,
    /// Readings that survive the method's check.
    pub post_filter: usize,
}

pub struct Parser<'g> {
    grammar: &'g Grammar,
}

impl<'g> Parser<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Parser { grammar }
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    /// Signs for every sense of the token at `pos`, stamped with the position.
    pub fn lexical_signs(
        &self,
        token: &str,
        pos: usize,
        method: Method,
    ) -> Result<Vec<(Cat, Sign, LexRef)>, ParseError> {
        let entries = self.grammar.lexicon.lookup(token);
        if entries.is_empty() {
            return Err(ParseError::UnknownTokens(vec![token.to_string()]));
        }
        Ok(entries
            .iter()
            .map(|e| {
                let sign = self
                    .grammar
                    .compile(e, method)
                    .expect("lexicon entries are validated at load")
                    .at_position(pos);
                let lex = LexRef {
                    word: e.word.clone(),
                    sense: e.sense.clone(),
                };
                (Cat::of_pos(e.pos), sign, lex)
            })
            .collect())
    }

    /// Unary schema applicable to a daughter, with the mother category.
    pub fn unary(&self, cat: Cat, sign: &Sign) -> Option<(Schema, Cat)> {
        match cat {
            Cat::ProperN => Some((Schema::ProperNp, Cat::Np)),
            Cat::N => Some((Schema::NounBar, Cat::NBar)),
            Cat::V if sign.comps().is_empty() => Some((Schema::NoComplements, Cat::Vp)),
            Cat::Vp if sign.subj().is_empty() => Some((Schema::Imperative, Cat::S)),
            _ => None,
        }
    }

    /// Binary schema applicable to adjacent daughters, with the mother
    /// category.
    pub fn binary(&self, left: (Cat, &Sign), right: (Cat, &Sign)) -> Option<(Schema, Cat)> {
        match (left.0, right.0) {
            (Cat::V, Cat::Np) => {
                let comps = left.1.comps().len();
                (comps > 0).then_some((
                    Schema::HeadComplement,
                    if comps == 1 { Cat::Vp } else { Cat::V },
                ))
            }
            (Cat::P, Cat::Np) => {
                (left.1.comps().len() == 1).then_some((Schema::HeadComplement, Cat::Pp))
            }
            (Cat::Np, Cat::Vp) => {
                (right.1.subj().len() == 1).then_some((Schema::HeadSubject, Cat::S))
            }
            (Cat::Det, Cat::NBar) => Some((Schema::DetNp, Cat::Np)),
            (Cat::Adj, Cat::NBar) => Some((Schema::AdjBar, Cat::NBar)),
            (Cat::Np, Cat::Pp) => Some((Schema::PpModifier, Cat::Np)),
            (Cat::Np, Cat::RelC) => Some((Schema::RelModifier, Cat::Np)),
            (Cat::RelPro, Cat::Vp) => {
                (right.1.subj().len() == 1).then_some((Schema::RelClause, Cat::RelC))
            }
            _ => None,
        }
    }

    /// Builds the mother sign of a binary schema. `Ok(None)` is an ordinary
    /// unification failure.
    pub fn combine(
        &self,
        left: &Sign,
        right: &Sign,
        schema: Schema,
    ) -> Result<Option<Sign>, ParseError> {
        match self.try_combine(left, right, schema) {
            Ok(sign) => Ok(Some(sign)),
            Err(e) if e.is_clash() => Ok(None),
            Err(e) => Err(ParseError::Unify(e)),
        }
    }

    fn try_combine(&self, left: &Sign, right: &Sign, schema: Schema) -> Result<Sign, UnifyError> {
        let h = &self.grammar.hierarchy;
        let mut ws = Workspace::new();
        let l = ws.import(left.fs());
        let r = ws.import(right.fs());
        let (head, dep) = if schema.head_is_left() {
            (l, r)
        } else {
            (r, l)
        };
        let index = |ws: &Workspace, n: NodeId, path: &[&str]| {
            ws.follow(n, path).expect("sign layout has this path")
        };

        let mut quants_extra = Vec::new();
        let mut restr_extra = Vec::new();
        let mut valence_pop = None;
        let mut relc = false;

        match schema {
            Schema::HeadComplement | Schema::HeadSubject => {
                let slot = if schema == Schema::HeadComplement {
                    feat::COMPS
                } else {
                    feat::SUBJ
                };
                let spec = index(&ws, head, &[slot, crate::tfs::FIRST]);
                ws.unify(spec, dep, h)?;
                valence_pop = Some(slot);
            }
            Schema::DetNp => {
                // the determiner's quantifier carries the noun's restrictions
                let restr = index(&ws, head, &[feat::CONT, feat::RESTR]);
                quants_extra = ws.list_items(restr).unwrap_or_default();
            }
            Schema::AdjBar | Schema::PpModifier | Schema::RelModifier => {
                let target = index(&ws, head, &[feat::CONT, feat::INDEX]);
                let modified = index(&ws, dep, &[feat::MOD, feat::INDEX]);
                ws.unify(modified, target, h)?;
                // inside N' the relation joins RESTR and reaches QUANTS with the
                // determiner; on a complete NP it goes to QUANTS directly
                if let Some(nuc) = ws.follow(dep, &[feat::CONT, feat::NUC]) {
                    if schema == Schema::AdjBar {
                        restr_extra.push(nuc);
                    } else {
                        quants_extra.push(nuc);
                    }
                }
            }
            Schema::RelClause => {
                let rel = index(&ws, dep, &[feat::CONT, feat::INDEX]);
                let subj = index(
                    &ws,
                    head,
                    &[feat::SUBJ, crate::tfs::FIRST, feat::CONT, feat::INDEX],
                );
                ws.unify(rel, subj, h)?;
                valence_pop = Some(feat::SUBJ);
                relc = true;
            }
            Schema::Lexical
            | Schema::Imperative
            | Schema::NoComplements
            | Schema::ProperNp
            | Schema::NounBar => unreachable!("{schema:?} is not binary"),
        }

        let mother = ws.atom("sign");
        for (f, child) in ws.features(head) {
            ws.set(mother, &f, child);
        }
        if let Some(slot) = valence_pop {
            let rest = index(&ws, head, &[slot, crate::tfs::REST]);
            ws.set(mother, slot, rest);
        }
        if relc {
            let h_atom = ws.atom("relc");
            ws.set(mother, feat::HEAD, h_atom);
            let m = ws.top();
            let rel = index(&ws, dep, &[feat::CONT, feat::INDEX]);
            ws.set(m, feat::INDEX, rel);
            ws.set(mother, feat::MOD, m);
        }
        if !restr_extra.is_empty() {
            let old = index(&ws, head, &[feat::CONT]);
            let cont = ws.atom("cont");
            for (f, child) in ws.features(old) {
                ws.set(cont, &f, child);
            }
            let mut items = ws
                .follow(old, &[feat::RESTR])
                .and_then(|n| ws.list_items(n))
                .unwrap_or_default();
            items.extend(restr_extra);
            let list = ws.list(&items);
            ws.set(cont, feat::RESTR, list);
            ws.set(mother, feat::CONT, cont);
        }

        let items = |ws: &Workspace, n: NodeId, f: &str| {
            ws.follow(n, &[f])
                .and_then(|l| ws.list_items(l))
                .unwrap_or_default()
        };
        let mut phon = items(&ws, l, feat::PHON);
        phon.extend(items(&ws, r, feat::PHON));
        let phon = ws.list(&phon);
        ws.set(mother, feat::PHON, phon);

        let mut quants = items(&ws, head, feat::QUANTS);
        quants.extend(items(&ws, dep, feat::QUANTS));
        quants.extend(quants_extra);
        let quants = ws.list(&quants);
        ws.set(mother, feat::QUANTS, quants);

        let mut bg = items(&ws, head, feat::BG);
        for q in items(&ws, dep, feat::BG) {
            match bg.iter().copied().find(|&p| same_qfpsoa(&ws, p, q)) {
                Some(p) => merge_sources(&mut ws, p, q),
                None => bg.push(q),
            }
        }
        let bg = ws.list(&bg);
        ws.set(mother, feat::BG, bg);

        Ok(Sign(ws.extract(mother)?))
    }

    /// All complete readings, with the chart that produced them.
    pub fn parse(&self, tokens: &[String], method: Method) -> Result<ParseOutcome, ParseError> {
        let unknown: Vec<String> = tokens
            .iter()
            .filter(|t| self.grammar.lexicon.lookup(t).is_empty())
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(ParseError::UnknownTokens(unknown));
        }

        let n = tokens.len();
        let mut edges: Vec<Edge> = Vec::new();
        let mut agenda = VecDeque::new();
        let mut by_start: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut by_end: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut failed = 0;

        for (i, token) in tokens.iter().enumerate() {
            for (cat, sign, lex) in self.lexical_signs(token, i, method)? {
                let id = edges.len();
                edges.push(Edge {
                    id,
                    start: i,
                    end: i + 1,
                    cat,
                    sign,
                    schema: Schema::Lexical,
                    children: Vec::new(),
                    lexical: Some(lex),
                });
                agenda.push_back(id);
            }
        }

        while let Some(id) = agenda.pop_front() {
            let (start, end, cat) = (edges[id].start, edges[id].end, edges[id].cat);

            if let Some((schema, mother)) = self.unary(cat, &edges[id].sign) {
                let new = edges.len();
                let sign = edges[id].sign.clone();
                edges.push(Edge {
                    id: new,
                    start,
                    end,
                    cat: mother,
                    sign,
                    schema,
                    children: vec![id],
                    lexical: None,
                });
                agenda.push_back(new);
            }

            let mut pairs: Vec<(usize, usize)> = by_end[start].iter().map(|&l| (l, id)).collect();
            pairs.extend(by_start[end].iter().map(|&r| (id, r)));
            for (l, r) in pairs {
                let (le, re) = (&edges[l], &edges[r]);
                let Some((schema, mother)) = self.binary((le.cat, &le.sign), (re.cat, &re.sign))
                else {
                    continue;
                };
                match self.combine(&le.sign, &re.sign, schema)? {
                    Some(sign) => {
                        let new = edges.len();
                        let (s, e) = (le.start, re.end);
                        edges.push(Edge {
                            id: new,
                            start: s,
                            end: e,
                            cat: mother,
                            sign,
                            schema,
                            children: vec![l, r],
                            lexical: None,
                        });
                        agenda.push_back(new);
                    }
                    None => failed += 1,
                }
            }

            by_start[start].push(id);
            by_end[end].push(id);
        }

        let mut outcome = ParseOutcome {
            method,
            tokens: tokens.to_vec(),
            edges,
            readings: Vec::new(),
            failed_unifications: failed,
        };
        outcome.readings = outcome
            .edges
            .iter()
            .filter(|e| e.cat == Cat::S && e.start == 0 && e.end == n && e.is_saturated())
            .map(|e| Reading {
                sign: e.sign.clone(),
                derivation: outcome.derivation(e.id),
                senses: outcome.senses(e.id),
                method,
                edge: e.id,
            })
            .collect();
        outcome.readings.sort_by_key(|r| r.id());
        Ok(outcome)
    }

    /// Readings with checking off, and those surviving `method`'s check.
    pub fn count_parses(
        &self,
        tokens: &[String],
        method: Method,
    ) -> Result<ParseCounts, ParseError> {
        let unchecked = self.parse(tokens, Method::Bg)?;
        let pre_filter = unchecked.readings.len();
        let post_filter = match method {
            Method::Bg => unchecked
                .readings
                .iter()
                .filter(|r| {
                    matches!(
                        selres::check_reading(r, &self.grammar.hierarchy),
                        SolveResult::Satisfiable { .. }
                    )
                })
                .count(),
            Method::Index => self.parse(tokens, Method::Index)?.readings.len(),
        };
        Ok(ParseCounts {
            pre_filter,
            post_filter,
        })
    }
}

/// Records `dup`'s contributing words on `kept`.
fn merge_sources(ws: &mut Workspace, kept: NodeId, dup: NodeId) {
    let words = |n: NodeId| -> Vec<String> {
        ws.feature(n, feat::SRC)
            .and_then(|s| ws.ty(s).as_atom().map(str::to_string))
            .map(|a| a.split('+').map(str::to_string).collect())
            .unwrap_or_default()
    };
    let mut all = words(kept);
    for w in words(dup) {
        if !all.contains(&w) {
            all.push(w);
        }
    }
    if !all.is_empty() {
        let atom = ws.atom(&all.join("+"));
        ws.set(kept, feat::SRC, atom);
    }
}

/// Same relation with the same role fillers, ignoring provenance.
fn same_qfpsoa(ws: &Workspace, a: NodeId, b: NodeId) -> bool {
    if ws.same(a, b) {
        return true;
    }
    if ws.ty(a) != ws.ty(b) {
        return false;
    }
    let roles = |n| {
        ws.features(n)
            .into_iter()
            .filter(|(f, _)| f.as_ref() != feat::SRC)
            .collect::<Vec<_>>()
    };
    let (ra, rb) = (roles(a), roles(b));
    ra.len() == rb.len()
        && ra.iter().zip(&rb).all(|((fa, na), (fb, nb))| {
            fa == fb
                && (ws.same(*na, *nb)
                    || (matches!(ws.ty(*na), NodeType::Atom(_))
                        && ws.ty(*na) == ws.ty(*nb)
                        && ws.features(*na).is_empty()
                        && ws.features(*nb).is_empty()))
        })
}
