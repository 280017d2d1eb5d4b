//! Institutional statements in an ADICO-lite form and their compilation into
//! shapes and triple masks.
//!
//! File format, one directive per line, `#` starts a comment line:
//!
//! ```text
//! version 3
//! prefix ex: <http://example.org/>
//! signal :Violation
//!
//! statement ex:LegalConstraint-12
//!   family local-law
//!   attribute ex:EmploymentContract
//!   deontic must-not
//!   aim ?c ex:employmentType ex:FullTime
//!   condition ?c ex:employee ?p
//!   condition ?p ex:age ?a filter ?a < 18
//!   or-else :Violation
//!   remedy ex:PartTime
//!   message "prohibition of full-time employment of minors"
//! end
//! ```
//!
//! The aim subject must be a variable; it names the regulated node, whose
//! `rdf:type` is the statement's attribute class.

mod compile;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{Iri, PatternTerm, RdfError, Term, TriplePattern};
use crate::shacl::NormFamily;

pub use compile::{compile_to_masks, compile_to_shapes, condition_class, materialize_conditions};
pub use parse::parse_manifest;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Rdf { line: usize, source: RdfError },
    #[error("missing `version` header")]
    MissingVersion,
    #[error("duplicate statement id {0}")]
    DuplicateId(Iri),
    #[error("line {line}: unknown deontic `{value}`")]
    UnknownDeontic { line: usize, value: String },
    #[error("statement {statement} references undeclared signal {signal}")]
    DanglingSignal { statement: Iri, signal: Iri },
    #[error("statement {statement} is missing `{field}`")]
    MissingField { statement: Iri, field: &'static str },
    #[error("statement {statement}: {detail}")]
    OrElse { statement: Iri, detail: String },
    #[error("statement {statement} cannot be compiled: {reason}")]
    Uncompilable { statement: Iri, reason: String },
    #[error("statements {a} and {b} share the local name used for their condition class")]
    ConditionClassCollision { a: Iri, b: Iri },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deontic {
    Must,
    MustNot,
    May,
}

impl Deontic {
    pub fn keyword(self) -> &'static str {
        match self {
            Deontic::Must => "must",
            Deontic::MustNot => "must-not",
            Deontic::May => "may",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [Deontic::Must, Deontic::MustNot, Deontic::May].into_iter().find(|d| d.keyword() == s)
    }
}

impl fmt::Display for Deontic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdicoStatement {
    pub id: Iri,
    pub family: NormFamily,
    pub attribute: Iri,
    pub deontic: Deontic,
    pub aim: TriplePattern,
    pub conditions: Vec<TriplePattern>,
    pub or_else: Option<Iri>,
    /// Values suggested as replacements when the statement is breached.
    pub remedy: Vec<Term>,
    pub message: String,
}

impl AdicoStatement {
    /// The aim's subject variable, if it is one.
    pub fn focus_var(&self) -> Option<&str> {
        self.aim.subject.as_var()
    }

    /// `?focus rdf:type <attribute>`.
    pub fn attribute_pattern(&self) -> Option<TriplePattern> {
        let v = self.focus_var()?;
        Some(TriplePattern::new(
            PatternTerm::var(v),
            PatternTerm::Const(Term::iri(crate::rdf::vocab::rdf_type())),
            PatternTerm::Const(Term::Iri(self.attribute.clone())),
        ))
    }

    /// The attribute pattern followed by the conditions.
    pub fn guard_patterns(&self) -> Vec<TriplePattern> {
        self.attribute_pattern().into_iter().chain(self.conditions.iter().cloned()).collect()
    }

    fn canonical(&self, out: &mut String) {
        let _ = writeln!(out, "statement {}", self.id);
        let _ = writeln!(out, "  aim {}", self.aim);
        let _ = writeln!(out, "  attribute {}", self.attribute);
        let mut conds: Vec<String> = self.conditions.iter().map(|c| c.to_string()).collect();
        conds.sort();
        for c in conds {
            let _ = writeln!(out, "  condition {c}");
        }
        let _ = writeln!(out, "  deontic {}", self.deontic);
        let _ = writeln!(out, "  family {}", self.family.keyword());
        if !self.message.is_empty() {
            let _ = writeln!(out, "  message {}", Term::string(&self.message));
        }
        if let Some(sig) = &self.or_else {
            let _ = writeln!(out, "  or-else {sig}");
        }
        let mut remedy: Vec<String> = self.remedy.iter().map(|t| t.to_string()).collect();
        remedy.sort();
        if !remedy.is_empty() {
            let _ = writeln!(out, "  remedy {}", remedy.join(" "));
        }
        out.push_str("end\n");
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub version: u64,
    pub signals: BTreeSet<Iri>,
    pub statements: Vec<AdicoStatement>,
    pub digest: String,
    pub prefixes: BTreeMap<String, String>,
}

impl Manifest {
    /// Builds a manifest from parts, checking the statement invariants and
    /// computing the digest.
    pub fn new(version: u64, signals: BTreeSet<Iri>, statements: Vec<AdicoStatement>) -> Result<Self, ManifestError> {
        let mut seen = BTreeSet::new();
        for s in &statements {
            if !seen.insert(&s.id) {
                return Err(ManifestError::DuplicateId(s.id.clone()));
            }
            match (s.deontic, &s.or_else) {
                (Deontic::May, Some(_)) => {
                    return Err(ManifestError::OrElse { statement: s.id.clone(), detail: "`may` statements carry no or-else".into() })
                }
                (Deontic::Must | Deontic::MustNot, None) => {
                    return Err(ManifestError::OrElse { statement: s.id.clone(), detail: format!("`{}` requires an or-else signal", s.deontic) })
                }
                (_, Some(sig)) if !signals.contains(sig) => {
                    return Err(ManifestError::DanglingSignal { statement: s.id.clone(), signal: sig.clone() })
                }
                _ => {}
            }
        }
        let mut m = Manifest {
            version,
            signals,
            statements,
            digest: String::new(),
            prefixes: crate::rdf::Graph::new().prefixes().clone(),
        };
        m.digest = m.compute_digest();
        Ok(m)
    }

    pub fn empty() -> Self {
        Manifest::new(0, BTreeSet::new(), Vec::new()).expect("empty manifest is valid")
    }

    /// Order-insensitive canonical text: signals, then statements by id, each
    /// with keys in lexical order and full IRIs. The version is excluded.
    pub fn canonical_body(&self) -> String {
        let mut out = String::new();
        for s in &self.signals {
            let _ = writeln!(out, "signal {s}");
        }
        let mut stmts: Vec<&AdicoStatement> = self.statements.iter().collect();
        stmts.sort_by(|a, b| a.id.cmp(&b.id));
        for s in stmts {
            s.canonical(&mut out);
        }
        out
    }

    pub fn compute_digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_body().as_bytes()))
    }

    pub fn statement(&self, id: &Iri) -> Option<&AdicoStatement> {
        self.statements.iter().find(|s| &s.id == id)
    }

    /// Statement id to its or-else signal.
    pub fn signal_map(&self) -> BTreeMap<&Iri, &Iri> {
        self.statements.iter().filter_map(|s| Some((&s.id, s.or_else.as_ref()?))).collect()
    }

    pub fn family_histogram(&self) -> BTreeMap<NormFamily, usize> {
        let mut h: BTreeMap<NormFamily, usize> = NormFamily::ALL.iter().map(|f| (*f, 0)).collect();
        for s in &self.statements {
            *h.entry(s.family).or_default() += 1;
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    Permit,
    Forbid,
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskMode::Permit => "permit",
            MaskMode::Forbid => "forbid",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSpec {
    pub statement_id: Iri,
    pub mode: MaskMode,
    /// Attribute pattern, then conditions, then the aim last.
    pub pattern: Vec<TriplePattern>,
}

impl MaskSpec {
    pub fn aim(&self) -> &TriplePattern {
        self.pattern.last().expect("mask patterns end with the aim")
    }
}
