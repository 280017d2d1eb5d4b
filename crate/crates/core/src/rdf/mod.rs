//! Canonical RDF model: terms, an in-memory triple set, the Turtle subset
//! reader/writer and basic graph-pattern matching.
//!
//! Blank nodes are compared by label within one store; two graphs that are
//! isomorphic up to blank-node renaming are *not* equal. Class membership is
//! plain `rdf:type`, with no RDFS or OWL entailment.

mod graph;
mod pattern;
mod term;
mod turtle;
pub mod vocab;

use thiserror::Error;

pub use graph::{set_ops, Graph, SetMode, Triple};
pub use pattern::{match_patterns, Binding, CmpOp, Filter, PatternTerm, TriplePattern};
pub use term::{BlankNode, Iri, Literal, Term};
pub use turtle::{parse_term, parse_terms, parse_turtle, serialize_turtle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown prefix `{prefix}:` at {line}:{col}")]
    UnknownPrefix { prefix: String, line: usize, col: usize },
    #[error("malformed IRI `{0}`")]
    MalformedIri(String),
    #[error("malformed literal {0}")]
    MalformedLiteral(String),
    #[error("literal {0} cannot be a subject")]
    LiteralSubject(String),
    #[error("filter references variable ?{0} that no pattern binds")]
    UnboundFilterVariable(String),
}
