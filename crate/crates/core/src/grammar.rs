//! Qfpsoa declarations, the lexicon, and compilation of lexical entries into
//! signs under either restriction method.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::sorts::{is_identifier, HierarchyError, Sort, SortHierarchy};
use crate::tfs::{FeatureStructure, NodeId, NodeType, Workspace};

pub const BUNDLED_DECLS: &str = include_str!("../data/roles.psoa");
pub const BUNDLED_LEXICON: &str = include_str!("../data/corpus.lex");

/// Feature names used in signs.
pub mod feat {
    pub const PHON: &str = "PHON";
    pub const HEAD: &str = "HEAD";
    pub const SUBJ: &str = "SUBJ";
    pub const COMPS: &str = "COMPS";
    pub const MOD: &str = "MOD";
    pub const CONT: &str = "CONT";
    pub const NUC: &str = "NUC";
    pub const INDEX: &str = "INDEX";
    pub const RESTR: &str = "RESTR";
    pub const QUANTS: &str = "QUANTS";
    pub const BG: &str = "BG";
    pub const INST: &str = "INST";
    /// Word (and, once parsed, position) that contributed a qfpsoa.
    pub const SRC: &str = "SRC";
    /// Word and position of the nominal that introduced an index.
    pub const ANCHOR: &str = "ANCHOR";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {error}")]
    Sort { line: usize, error: HierarchyError },
    #[error("line {line}: unknown qfpsoa `{name}`")]
    UnknownQfpsoa { line: usize, name: String },
    #[error("line {line}: duplicate qfpsoa declaration `{name}`")]
    DuplicateQfpsoa { line: usize, name: String },
    #[error(
        "line {line}: qfpsoa `{name}` has {roles} roles but `{word}` supplies {args} arguments"
    )]
    ArityMismatch {
        line: usize,
        word: String,
        name: String,
        roles: usize,
        args: usize,
    },
    #[error("`{word}`: restriction {role}:{sort} is not subsumed by the declared {declared}")]
    OverrideNotSubsumed {
        word: String,
        role: String,
        sort: String,
        declared: String,
    },
    #[error("`{word}`: qfpsoa `{name}` has no role `{role}`")]
    UnknownRole {
        word: String,
        name: String,
        role: String,
    },
    #[error("`{word}`: role `{role}` of `{name}` is literal and cannot take an argument")]
    LiteralArgument {
        word: String,
        name: String,
        role: String,
    },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// What a role admits: an index of some sort, or a literal word form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    Sort(Sort),
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub restriction: Restriction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QfpsoaDecl {
    pub name: String,
    pub roles: Vec<Role>,
}

impl QfpsoaDecl {
    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Decls {
    decls: BTreeMap<String, QfpsoaDecl>,
}

impl Decls {
    pub fn bundled(h: &SortHierarchy) -> Self {
        Decls::parse(BUNDLED_DECLS, h).expect("bundled declarations are well formed")
    }

    pub fn from_file(path: impl AsRef<Path>, h: &SortHierarchy) -> Result<Self, GrammarError> {
        Decls::parse(&read(path.as_ref())?, h)
    }

    pub fn get(&self, name: &str) -> Option<&QfpsoaDecl> {
        self.decls.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &QfpsoaDecl> {
        self.decls.values()
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn parse(src: &str, h: &SortHierarchy) -> Result<Self, GrammarError> {
        let mut decls = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = strip_comment(raw);
            if text.is_empty() {
                continue;
            }
            let syntax = |message: String| GrammarError::Syntax { line, message };
            let (name, rest) = text
                .split_once('(')
                .ok_or_else(|| syntax(format!("expected `name(role: sort, ...)`, got `{text}`")))?;
            let body = rest
                .trim_end()
                .strip_suffix(')')
                .ok_or_else(|| syntax("missing closing `)`".into()))?;
            let name = name.trim().to_ascii_lowercase();
            if !is_identifier(&name) {
                return Err(syntax(format!("bad qfpsoa name `{name}`")));
            }
            let mut roles: Vec<Role> = Vec::new();
            for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (role, sort) = part
                    .split_once(':')
                    .ok_or_else(|| syntax(format!("expected `role: sort`, got `{part}`")))?;
                let role = role.trim().to_ascii_lowercase();
                let sort = sort.trim();
                if !is_identifier(&role) {
                    return Err(syntax(format!("bad role name `{role}`")));
                }
                if roles.iter().any(|r| r.name == role) {
                    return Err(syntax(format!("role `{role}` repeated in `{name}`")));
                }
                let restriction = if sort.eq_ignore_ascii_case("literal") {
                    Restriction::Literal
                } else {
                    Restriction::Sort(
                        h.resolve(sort)
                            .map_err(|error| GrammarError::Sort { line, error })?,
                    )
                };
                roles.push(Role {
                    name: role,
                    restriction,
                });
            }
            if decls.contains_key(&name) {
                return Err(GrammarError::DuplicateQfpsoa { line, name });
            }
            decls.insert(name.clone(), QfpsoaDecl { name, roles });
        }
        Ok(Decls { decls })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Verb,
    Noun,
    ProperNoun,
    Determiner,
    Preposition,
    RelativePronoun,
    Adjective,
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "verb" => Pos::Verb,
            "noun" => Pos::Noun,
            "proper-noun" => Pos::ProperNoun,
            "determiner" => Pos::Determiner,
            "preposition" => Pos::Preposition,
            "relative-pronoun" => Pos::RelativePronoun,
            "adjective" => Pos::Adjective,
            other => return Err(format!("unknown part of speech `{other}`")),
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pos::Verb => "verb",
            Pos::Noun => "noun",
            Pos::ProperNoun => "proper-noun",
            Pos::Determiner => "determiner",
            Pos::Preposition => "preposition",
            Pos::RelativePronoun => "relative-pronoun",
            Pos::Adjective => "adjective",
        })
    }
}

/// How selectional restrictions end up in compiled signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Single-role qfpsoas in BG over bare `ref` indices; checked after
    /// parsing.
    Bg,
    /// Restriction sorts on the indices themselves; checked by unification
    /// while parsing.
    Index,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bg => "bg",
            Method::Index => "index",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bg" => Ok(Method::Bg),
            "index" => Ok(Method::Index),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    /// Surface form as written in the lexicon.
    pub word: String,
    pub pos: Pos,
    pub nucleus: Option<String>,
    pub index_sort: Option<Sort>,
    pub has_subj: bool,
    pub comps: usize,
    pub bg_extras: Vec<String>,
    pub sense: String,
    /// Entry-local narrowing of declared role restrictions.
    pub overrides: Vec<(String, Sort)>,
    pub line: usize,
}

impl LexicalEntry {
    /// Number of nucleus roles filled by arguments.
    pub fn arg_count(&self) -> usize {
        match self.pos {
            Pos::Verb => usize::from(self.has_subj) + self.comps,
            Pos::Preposition => 1 + self.comps,
            Pos::Adjective => 1,
            _ => 0,
        }
    }

    pub fn key(&self) -> String {
        self.word.to_ascii_lowercase()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<LexicalEntry>>,
}

impl Lexicon {
    pub fn bundled(h: &SortHierarchy, decls: &Decls) -> Self {
        Lexicon::parse(BUNDLED_LEXICON, h, decls).expect("bundled lexicon is well formed")
    }

    pub fn from_file(
        path: impl AsRef<Path>,
        h: &SortHierarchy,
        decls: &Decls,
    ) -> Result<Self, GrammarError> {
        Lexicon::parse(&read(path.as_ref())?, h, decls)
    }

    /// All senses of a (lowercased) word.
    pub fn lookup(&self, word: &str) -> &[LexicalEntry] {
        self.entries
            .get(&word.to_ascii_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexicalEntry> {
        self.entries.values().flatten()
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(src: &str, h: &SortHierarchy, decls: &Decls) -> Result<Self, GrammarError> {
        let mut entries: BTreeMap<String, Vec<LexicalEntry>> = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = strip_comment(raw);
            if text.is_empty() {
                continue;
            }
            let entry = parse_entry(text, line, h, decls)?;
            entries.entry(entry.key()).or_default().push(entry);
        }
        Ok(Lexicon { entries })
    }
}

fn parse_entry(
    text: &str,
    line: usize,
    h: &SortHierarchy,
    decls: &Decls,
) -> Result<LexicalEntry, GrammarError> {
    let syntax = |message: String| GrammarError::Syntax { line, message };
    let fields: Vec<&str> = text.split('|').map(str::trim).collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(syntax(format!(
            "expected `word | pos | nucleus-or-indexsort | extras`, got `{text}`"
        )));
    }
    let word = fields[0].to_string();
    if word.is_empty() || word.contains(char::is_whitespace) {
        return Err(syntax(format!("bad word `{word}`")));
    }
    let pos: Pos = fields[1].parse().map_err(syntax)?;
    let third = fields[2];
    let extras = fields.get(3).copied().unwrap_or("");

    let mut entry = LexicalEntry {
        sense: word.to_ascii_lowercase(),
        word,
        pos,
        nucleus: None,
        index_sort: None,
        has_subj: pos == Pos::Verb,
        comps: usize::from(pos == Pos::Preposition),
        bg_extras: Vec::new(),
        overrides: Vec::new(),
        line,
    };

    match pos {
        Pos::Verb | Pos::Preposition | Pos::Adjective => {
            let name = third.to_ascii_lowercase();
            if decls.get(&name).is_none() {
                return Err(GrammarError::UnknownQfpsoa { line, name });
            }
            entry.nucleus = Some(name);
        }
        Pos::Noun | Pos::ProperNoun => {
            let sort = h
                .resolve(third)
                .map_err(|error| GrammarError::Sort { line, error })?;
            // the root plays the part of `ref`, so every sort qualifies
            debug_assert!(h.subsumes(h.root(), sort));
            entry.index_sort = Some(sort);
        }
        Pos::Determiner | Pos::RelativePronoun => {
            if !(third.is_empty() || third == "-") {
                return Err(syntax(format!("{pos} entries take `-` in the third field")));
            }
        }
    }

    for item in extras.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected key=value, got `{item}`")))?;
        match key {
            "subj" if pos == Pos::Verb => {
                entry.has_subj = match value {
                    "np" => true,
                    "none" => false,
                    _ => return Err(syntax(format!("bad subj `{value}`"))),
                }
            }
            "comps" if matches!(pos, Pos::Verb | Pos::Preposition) => {
                entry.comps = if value == "none" {
                    0
                } else {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.iter().any(|p| *p != "np") {
                        return Err(syntax(format!("bad comps `{value}`")));
                    }
                    parts.len()
                }
            }
            "sense" => entry.sense = value.to_ascii_lowercase(),
            "bg" => {
                let name = value.to_ascii_lowercase();
                if decls.get(&name).is_none() {
                    return Err(GrammarError::UnknownQfpsoa { line, name });
                }
                if entry.index_sort.is_none() {
                    return Err(syntax("bg conditions need a nominal entry".into()));
                }
                entry.bg_extras.push(name);
            }
            "restrict" => {
                let (role, sort) = value
                    .split_once(':')
                    .ok_or_else(|| syntax(format!("expected restrict=role:sort, got `{value}`")))?;
                let sort = h
                    .resolve(sort)
                    .map_err(|error| GrammarError::Sort { line, error })?;
                entry.overrides.push((role.to_ascii_lowercase(), sort));
            }
            _ => return Err(syntax(format!("unknown extra `{key}` for {pos}"))),
        }
    }

    if let Some(name) = &entry.nucleus {
        let decl = decls.get(name).expect("checked above");
        if decl.roles.len() != entry.arg_count() {
            return Err(GrammarError::ArityMismatch {
                line,
                word: entry.word.clone(),
                name: name.clone(),
                roles: decl.roles.len(),
                args: entry.arg_count(),
            });
        }
        apply_qfpsoa_declarations(&entry, decls, h)?;
    } else if !entry.overrides.is_empty() {
        return Err(syntax("restrict= needs an entry with a nucleus".into()));
    }
    Ok(entry)
}

/// Role restrictions of the entry's nucleus in role order: the declared
/// restriction, narrowed by any entry-local override.
pub fn apply_qfpsoa_declarations(
    entry: &LexicalEntry,
    decls: &Decls,
    h: &SortHierarchy,
) -> Result<Vec<(String, Restriction)>, GrammarError> {
    let Some(name) = &entry.nucleus else {
        return Ok(Vec::new());
    };
    let decl = decls.get(name).ok_or_else(|| GrammarError::UnknownQfpsoa {
        line: entry.line,
        name: name.clone(),
    })?;
    for (role, _) in &entry.overrides {
        if decl.role(role).is_none() {
            return Err(GrammarError::UnknownRole {
                word: entry.word.clone(),
                name: name.clone(),
                role: role.clone(),
            });
        }
    }
    let mut out = Vec::with_capacity(decl.roles.len());
    for role in &decl.roles {
        let declared = match role.restriction {
            Restriction::Sort(s) => s,
            Restriction::Literal => {
                return Err(GrammarError::LiteralArgument {
                    word: entry.word.clone(),
                    name: name.clone(),
                    role: role.name.clone(),
                })
            }
        };
        let mut effective = declared;
        for (r, sort) in entry.overrides.iter().filter(|(r, _)| *r == role.name) {
            if !h.subsumes(declared, *sort) {
                return Err(GrammarError::OverrideNotSubsumed {
                    word: entry.word.clone(),
                    role: r.clone(),
                    sort: h.name(*sort).to_string(),
                    declared: h.name(declared).to_string(),
                });
            }
            effective = *sort;
        }
        out.push((role.name.clone(), Restriction::Sort(effective)));
    }
    Ok(out)
}

/// A compiled sign. Layout:
///
/// ```text
/// sign [ PHON  HEAD  SUBJ  COMPS  (MOD)  CONT [ NUC | INDEX RESTR ]  QUANTS  BG ]
/// ```
///
/// SUBJ, COMPS, RESTR, QUANTS and BG are lists; BG is kept duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sign(pub FeatureStructure);

impl Sign {
    pub fn fs(&self) -> &FeatureStructure {
        &self.0
    }

    pub fn list(&self, path: &[&str]) -> Vec<NodeId> {
        self.0
            .get(path)
            .and_then(|n| self.0.list_items(n))
            .unwrap_or_default()
    }

    pub fn head(&self) -> Option<&str> {
        self.0
            .get(&[feat::HEAD])
            .and_then(|n| self.0.ty(n).as_atom())
    }

    pub fn phon(&self) -> Vec<String> {
        self.list(&[feat::PHON])
            .into_iter()
            .filter_map(|n| self.0.ty(n).as_atom().map(str::to_string))
            .collect()
    }

    pub fn subj(&self) -> Vec<NodeId> {
        self.list(&[feat::SUBJ])
    }

    pub fn comps(&self) -> Vec<NodeId> {
        self.list(&[feat::COMPS])
    }

    pub fn bg(&self) -> Vec<NodeId> {
        self.list(&[feat::BG])
    }

    pub fn quants(&self) -> Vec<NodeId> {
        self.list(&[feat::QUANTS])
    }

    pub fn restr(&self) -> Vec<NodeId> {
        self.list(&[feat::CONT, feat::RESTR])
    }

    pub fn index(&self) -> Option<NodeId> {
        self.0.get(&[feat::CONT, feat::INDEX])
    }

    /// Relation name and role fillers of a qfpsoa node, without SRC.
    pub fn qfpsoa(&self, n: NodeId) -> Option<(&str, Vec<(&str, NodeId)>)> {
        let rel = self.0.ty(n).as_atom()?;
        let roles = self
            .0
            .features(n)
            .filter(|(f, _)| *f != feat::SRC)
            .collect();
        Some((rel, roles))
    }

    /// Contributing word of a qfpsoa node, if recorded.
    pub fn source(&self, n: NodeId) -> Option<&str> {
        self.0
            .feature(n, feat::SRC)
            .and_then(|s| self.0.ty(s).as_atom())
    }

    /// Contributing words of a qfpsoa node; several when BG merged
    /// identical conditions.
    pub fn sources(&self, n: NodeId) -> Vec<&str> {
        self.source(n)
            .map(|s| s.split('+').collect())
            .unwrap_or_default()
    }

    /// Short predicate-logic rendering of a qfpsoa, with index nodes named
    /// by `var`.
    pub fn render_qfpsoa(&self, n: NodeId, var: &dyn Fn(NodeId) -> String) -> String {
        let Some((rel, roles)) = self.qfpsoa(n) else {
            return "?".into();
        };
        let args: Vec<String> = roles
            .iter()
            .map(|&(_, filler)| match self.0.ty(filler) {
                NodeType::Atom(a) => a.to_string(),
                _ => var(filler),
            })
            .collect();
        format!("{rel}({})", args.join(","))
    }

    /// Stamps token position `pos` onto SRC and ANCHOR atoms.
    pub fn at_position(&self, pos: usize) -> Sign {
        let stamp = |a: &str| format!("{a}@{pos}");
        Sign(
            self.0
                .rewrite_atoms(feat::SRC, stamp)
                .rewrite_atoms(feat::ANCHOR, stamp),
        )
    }

    pub fn display<'a>(&'a self, h: &'a SortHierarchy) -> impl fmt::Display + 'a {
        self.0.display(h)
    }
}

/// Compiles an entry into its sign under `method`. Entries from
/// [`Lexicon::parse`] are already validated, so this only fails for
/// hand-built entries.
pub fn compile_entry(
    entry: &LexicalEntry,
    decls: &Decls,
    h: &SortHierarchy,
    method: Method,
) -> Result<Sign, GrammarError> {
    let restrictions = apply_qfpsoa_declarations(entry, decls, h)?;
    let src = entry.key();
    let mut ws = Workspace::new();
    let root = ws.atom("sign");
    let cont = ws.atom("cont");
    let mut bg = Vec::new();
    let mut restr = Vec::new();

    let word = ws.atom(&entry.key());
    let phon = ws.list(&[word]);
    ws.set(root, feat::PHON, phon);

    let head = match entry.pos {
        Pos::Verb => "verb",
        Pos::Noun | Pos::ProperNoun => "noun",
        Pos::Determiner => "det",
        Pos::Preposition => "prep",
        Pos::RelativePronoun => "relpro",
        Pos::Adjective => "adj",
    };
    let head = ws.atom(head);
    ws.set(root, feat::HEAD, head);

    let mut subj = Vec::new();
    let mut comps = Vec::new();

    match entry.pos {
        Pos::Verb | Pos::Preposition | Pos::Adjective => {
            let name = entry
                .nucleus
                .as_deref()
                .expect("validated entry has a nucleus");
            let nuc = ws.atom(name);
            let mut args = Vec::with_capacity(restrictions.len());
            for (role, restriction) in &restrictions {
                let Restriction::Sort(sort) = *restriction else {
                    unreachable!("literal roles rejected by apply_qfpsoa_declarations")
                };
                let index = match method {
                    Method::Bg => {
                        let index = ws.sort(h.root());
                        if sort != h.root() {
                            bg.push(single_role(&mut ws, h.name(sort), index, &src));
                        }
                        index
                    }
                    Method::Index => ws.sort(sort),
                };
                ws.set(nuc, &role.to_ascii_uppercase(), index);
                args.push(index);
            }
            let s = ws.atom(&src);
            ws.set(nuc, feat::SRC, s);
            ws.set(cont, feat::NUC, nuc);

            let mut rest = args.as_slice();
            match entry.pos {
                Pos::Verb => {
                    if entry.has_subj {
                        subj.push(np_spec(&mut ws, rest[0]));
                        rest = &rest[1..];
                    }
                }
                _ => {
                    let m = ws.top();
                    ws.set(m, feat::INDEX, rest[0]);
                    ws.set(root, feat::MOD, m);
                    rest = &rest[1..];
                }
            }
            for &arg in rest {
                comps.push(np_spec(&mut ws, arg));
            }
        }
        Pos::Noun | Pos::ProperNoun => {
            let sort = entry
                .index_sort
                .expect("validated nominal has an index sort");
            let index = match method {
                Method::Bg => ws.sort(h.root()),
                Method::Index => ws.sort(sort),
            };
            let anchor = ws.atom(&src);
            ws.set(index, feat::ANCHOR, anchor);
            ws.set(cont, feat::INDEX, index);

            for extra in &entry.bg_extras {
                bg.push(bg_extra(&mut ws, decls, extra, index, entry, &src));
            }
            if method == Method::Bg {
                let atom = single_role(&mut ws, h.name(sort), index, &src);
                if entry.pos == Pos::ProperNoun {
                    bg.push(atom);
                } else {
                    restr.push(atom);
                }
            }
            let r = ws.list(&restr);
            ws.set(cont, feat::RESTR, r);
        }
        Pos::RelativePronoun => {
            let index = ws.sort(h.root());
            ws.set(cont, feat::INDEX, index);
        }
        Pos::Determiner => {}
    }

    let subj = ws.list(&subj);
    ws.set(root, feat::SUBJ, subj);
    let comps = ws.list(&comps);
    ws.set(root, feat::COMPS, comps);
    ws.set(root, feat::CONT, cont);
    let quants = ws.list(&[]);
    ws.set(root, feat::QUANTS, quants);
    let bg = ws.list(&bg);
    ws.set(root, feat::BG, bg);

    Ok(Sign(ws.extract(root).expect("lexical signs are acyclic")))
}

/// `sort(INST: index)` tagged with its contributing word.
fn single_role(ws: &mut Workspace, sort: &str, index: NodeId, src: &str) -> NodeId {
    let q = ws.atom(sort);
    ws.set(q, feat::INST, index);
    let s = ws.atom(src);
    ws.set(q, feat::SRC, s);
    q
}

fn bg_extra(
    ws: &mut Workspace,
    decls: &Decls,
    name: &str,
    index: NodeId,
    entry: &LexicalEntry,
    src: &str,
) -> NodeId {
    let decl = decls.get(name).expect("validated bg condition");
    let q = ws.atom(name);
    for role in &decl.roles {
        let filler = match role.restriction {
            Restriction::Sort(_) => index,
            Restriction::Literal => ws.atom(&entry.word),
        };
        ws.set(q, &role.name.to_ascii_uppercase(), filler);
    }
    let s = ws.atom(src);
    ws.set(q, feat::SRC, s);
    q
}

/// A saturated noun phrase whose index is `index`.
fn np_spec(ws: &mut Workspace, index: NodeId) -> NodeId {
    let spec = ws.top();
    let head = ws.atom("noun");
    ws.set(spec, feat::HEAD, head);
    let subj = ws.list(&[]);
    ws.set(spec, feat::SUBJ, subj);
    let comps = ws.list(&[]);
    ws.set(spec, feat::COMPS, comps);
    let cont = ws.top();
    ws.set(cont, feat::INDEX, index);
    ws.set(spec, feat::CONT, cont);
    spec
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn read(path: &Path) -> Result<String, GrammarError> {
    std::fs::read_to_string(path).map_err(|e| GrammarError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Hierarchy, declarations and lexicon loaded together.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub hierarchy: SortHierarchy,
    pub decls: Decls,
    pub lexicon: Lexicon,
}

impl Grammar {
    pub fn bundled() -> Self {
        let hierarchy = SortHierarchy::bundled();
        let decls = Decls::bundled(&hierarchy);
        let lexicon = Lexicon::bundled(&hierarchy, &decls);
        Grammar {
            hierarchy,
            decls,
            lexicon,
        }
    }

    pub fn compile(&self, entry: &LexicalEntry, method: Method) -> Result<Sign, GrammarError> {
        compile_entry(entry, &self.decls, &self.hierarchy, method)
    }
}
