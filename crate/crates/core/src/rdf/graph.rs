use std::collections::btree_set;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::term::{Iri, Term};
use super::vocab::RESERVED_PREFIXES;
use super::RdfError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    /// Rejects literal subjects. The predicate is an [`Iri`] by type.
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject(subject.to_string()));
        }
        Ok(Triple { subject, predicate, object })
    }

    /// Convenience for IRI-only triples, which are always well formed.
    pub fn iris(s: &str, p: &str, o: &str) -> Self {
        Triple { subject: Term::iri(s), predicate: Iri::new(p), object: Term::iri(o) }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    /// Same subject and predicate, different object.
    pub fn with_object(&self, object: Term) -> Triple {
        Triple { subject: self.subject.clone(), predicate: self.predicate.clone(), object }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A set of triples plus the prefix map used for parsing and serialization.
///
/// Equality compares triple sets only; prefixes are presentation.
#[derive(Clone, Debug)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new() -> Self {
        let prefixes = RESERVED_PREFIXES.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Graph { triples: BTreeSet::new(), prefixes }
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut g = Graph::new();
        g.extend(triples);
        g
    }

    /// Returns `false` when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn bind_prefix(&mut self, name: &str, base: &str) {
        self.prefixes.insert(name.to_string(), base.to_string());
    }

    pub(crate) fn set_prefixes(&mut self, prefixes: BTreeMap<String, String>) {
        self.prefixes = prefixes;
    }

    /// All triples with the given subject, in canonical order.
    pub fn with_subject<'a>(&'a self, subject: &'a Term) -> impl Iterator<Item = &'a Triple> + 'a {
        let start = Triple { subject: subject.clone(), predicate: Iri::new(""), object: Term::min_value() };
        self.triples.range(start..).take_while(move |t| &t.subject == subject)
    }

    pub fn objects<'a>(&'a self, subject: &'a Term, predicate: &'a Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.with_subject(subject).filter(move |t| &t.predicate == predicate).map(|t| &t.object)
    }

    pub fn subjects_with<'a>(&'a self, predicate: &'a Iri, object: &'a Term) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.predicate == predicate && &t.object == object)
            .map(|t| &t.subject)
    }

    /// Whether the term occurs in any position.
    pub fn mentions(&self, term: &Term) -> bool {
        self.triples.iter().any(|t| &t.subject == term || &t.object == term || matches!(term, Term::Iri(i) if i == &t.predicate))
    }

    pub fn is_subset(&self, other: &Graph) -> bool {
        self.triples.is_subset(&other.triples)
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph::from_triples(iter)
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetMode {
    Union,
    Intersection,
    Difference,
}

/// Set algebra over canonical triples. The result carries `a`'s prefixes
/// extended with any of `b`'s that `a` does not define.
pub fn set_ops(a: &Graph, b: &Graph, mode: SetMode) -> Graph {
    let triples: BTreeSet<Triple> = match mode {
        SetMode::Union => a.triples.union(&b.triples).cloned().collect(),
        SetMode::Intersection => a.triples.intersection(&b.triples).cloned().collect(),
        SetMode::Difference => a.triples.difference(&b.triples).cloned().collect(),
    };
    let mut prefixes = a.prefixes.clone();
    for (k, v) in &b.prefixes {
        prefixes.entry(k.clone()).or_insert_with(|| v.clone());
    }
    Graph { triples, prefixes }
}
