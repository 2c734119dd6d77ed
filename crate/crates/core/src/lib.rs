//! Unification-grammar parsing with selectional restrictions.
//!
//! Restrictions such as "the object of *eat* is edible" can be enforced in
//! two ways, and this crate implements both over the same lexicon:
//!
//! * [`Method::Bg`]: restrictions become single-role conditions in a sign's
//!   background. Parsing ignores them; [`selres`] collects and solves them
//!   against the sort hierarchy afterwards.
//! * [`Method::Index`]: restrictions become sorts on referential indices, so
//!   a violating analysis fails to unify and is pruned during parsing.
//!
//! ```
//! use hpsg_selres::{Grammar, Method, Parser};
//!
//! let grammar = Grammar::bundled();
//! let parser = Parser::new(&grammar);
//! let tokens = hpsg_selres::tokenize("Tom ate a keyboard.");
//! assert_eq!(parser.parse(&tokens, Method::Bg).unwrap().readings.len(), 1);
//! assert_eq!(parser.parse(&tokens, Method::Index).unwrap().readings.len(), 0);
//! ```

pub mod grammar;
pub mod parser;
pub mod selres;
pub mod sorts;
pub mod tfs;

pub use grammar::{Decls, Grammar, LexicalEntry, Lexicon, Method, Sign};
pub use parser::{tokenize, Edge, ParseError, ParseOutcome, Parser, Reading};
pub use selres::{ConstraintAtom, SolveResult};
pub use sorts::{HierarchyError, Sort, SortHierarchy};
pub use tfs::{FeatureStructure, NodeType, UnifyError};
