use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use regex::Regex;
use serde::Serialize;

use super::{ConstraintKind, Direction, PropertyConstraint, PropertyPath, Severity, Shape, ShapeError, Target};
use crate::exec::{self, Execution};
use crate::rdf::vocab::rdf;
use crate::rdf::{Graph, Iri, Term, Triple};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationResult {
    pub focus: Term,
    pub path: PropertyPath,
    pub kind: ConstraintKind,
    pub offending_value: Option<Term>,
    pub offending_triples: BTreeSet<Triple>,
    pub source_shape: Iri,
    pub norm_id: Iri,
    pub severity: Severity,
    pub message: String,
}

impl ValidationResult {
    fn sort_key(&self) -> (&Term, &PropertyPath, ConstraintKind, &Option<Term>, &Iri) {
        (&self.focus, &self.path, self.kind, &self.offending_value, &self.source_shape)
    }
}

impl PartialOrd for ValidationResult {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValidationResult {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key()).then_with(|| self.offending_triples.cmp(&other.offending_triples))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub conforms: bool,
    pub results: Vec<ValidationResult>,
}

impl ValidationReport {
    pub fn violations(&self) -> impl Iterator<Item = &ValidationResult> {
        self.results.iter().filter(|r| r.severity == Severity::Violation)
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }
}

/// Explicit target nodes that occur in `data`, plus every subject typed with
/// a target class. Subclasses are not expanded.
pub fn focus_nodes(data: &Graph, shape: &Shape) -> BTreeSet<Term> {
    let ty = Iri::new(rdf("type"));
    let mut out = BTreeSet::new();
    for t in &shape.targets {
        match t {
            Target::Class(c) => {
                let class = Term::Iri(c.clone());
                out.extend(data.subjects_with(&ty, &class).cloned());
            }
            Target::Node(n) => {
                if data.mentions(n) {
                    out.insert(n.clone());
                }
            }
        }
    }
    out
}

/// Values reached from `focus` along `path`, each with its supporting triple.
pub fn path_values<'g>(data: &'g Graph, focus: &'g Term, path: &PropertyPath) -> Vec<(Term, &'g Triple)> {
    match path.direction {
        Direction::Forward => data
            .with_subject(focus)
            .filter(|t| t.predicate() == &path.predicate)
            .map(|t| (t.object().clone(), t))
            .collect(),
        Direction::Inverse => data
            .iter()
            .filter(|t| t.predicate() == &path.predicate && t.object() == focus)
            .map(|t| (t.subject().clone(), t))
            .collect(),
    }
}

/// Triples that put `focus` in scope of `shape`: its `rdf:type` assertions
/// for the shape's target classes, or, for explicit node targets only, every
/// triple that mentions it.
fn anchor_triples(data: &Graph, shape: &Shape, focus: &Term) -> BTreeSet<Triple> {
    let ty = Iri::new(rdf("type"));
    let mut out = BTreeSet::new();
    for t in &shape.targets {
        if let Target::Class(c) = t {
            if let Ok(tr) = Triple::new(focus.clone(), ty.clone(), Term::Iri(c.clone())) {
                if data.contains(&tr) {
                    out.insert(tr);
                }
            }
        }
    }
    if out.is_empty() {
        out.extend(
            data.iter()
                .filter(|t| t.subject() == focus || t.object() == focus || matches!(focus, Term::Iri(i) if i == t.predicate()))
                .cloned(),
        );
    }
    out
}

fn has_type(data: &Graph, value: &Term, class: &Iri) -> bool {
    if value.is_literal() {
        return false;
    }
    Triple::new(value.clone(), Iri::new(rdf("type")), Term::Iri(class.clone())).map(|t| data.contains(&t)).unwrap_or(false)
}

fn cmp_numeric(value: &Term, bound: &Term) -> Option<Ordering> {
    Some(value.numeric_value()?.cmp(&bound.numeric_value()?))
}

fn pattern_subject(value: &Term) -> Option<&str> {
    match value {
        Term::Iri(i) => Some(i.as_str()),
        Term::Literal(l) => Some(l.lexical()),
        Term::Blank(_) => None,
    }
}

type RegexCache = HashMap<String, Regex>;

fn compile_patterns(shapes: &[Shape]) -> Result<RegexCache, ShapeError> {
    let mut cache = RegexCache::new();
    for c in shapes.iter().flat_map(|s| &s.constraints) {
        if let Some(p) = &c.checks.pattern {
            if !cache.contains_key(p) {
                let re = Regex::new(p).map_err(|e| ShapeError::Regex { pattern: p.clone(), detail: e.to_string() })?;
                cache.insert(p.clone(), re);
            }
        }
    }
    Ok(cache)
}

struct Ctx<'a> {
    data: &'a Graph,
    shape: &'a Shape,
    regexes: &'a RegexCache,
    out: Vec<ValidationResult>,
}

impl Ctx<'_> {
    fn emit(&mut self, focus: &Term, c: &PropertyConstraint, kind: ConstraintKind, value: Option<Term>, triples: BTreeSet<Triple>) {
        self.out.push(ValidationResult {
            focus: focus.clone(),
            path: c.path.clone(),
            kind,
            offending_value: value,
            offending_triples: triples,
            source_shape: self.shape.id.clone(),
            norm_id: self.shape.norm_id.clone(),
            severity: self.shape.severity,
            message: self.shape.message.clone(),
        });
    }

    fn check(&mut self, focus: &Term, c: &PropertyConstraint) {
        let values = path_values(self.data, focus, &c.path);
        let k = &c.checks;
        if let Some(n) = k.min_count {
            if values.len() < n {
                let anchors = anchor_triples(self.data, self.shape, focus);
                self.emit(focus, c, ConstraintKind::MinCount, None, anchors);
            }
        }
        if let Some(n) = k.max_count {
            if values.len() > n {
                let all = values.iter().map(|(_, t)| (*t).clone()).collect();
                self.emit(focus, c, ConstraintKind::MaxCount, None, all);
            }
        }
        if let Some(v) = &k.has_value {
            if !values.iter().any(|(x, _)| x == v) {
                let anchors = anchor_triples(self.data, self.shape, focus);
                self.emit(focus, c, ConstraintKind::HasValue, None, anchors);
            }
        }
        for (value, triple) in &values {
            for kind in value_failures(self.data, c, value, self.regexes) {
                self.emit(focus, c, kind, Some(value.clone()), BTreeSet::from([(*triple).clone()]));
            }
        }
    }
}

/// Value-level checks that `value` fails, in [`ConstraintKind`] order.
pub(crate) fn value_failures(data: &Graph, c: &PropertyConstraint, value: &Term, regexes: &RegexCache) -> Vec<ConstraintKind> {
    let k = &c.checks;
    let mut out = Vec::new();
    if let Some(dt) = &k.datatype {
        if value.as_literal().map(|l| l.datatype() != dt).unwrap_or(true) {
            out.push(ConstraintKind::Datatype);
        }
    }
    if let Some(class) = &k.class {
        if !has_type(data, value, class) {
            out.push(ConstraintKind::Class);
        }
    }
    if let Some(nk) = k.node_kind {
        if !nk.admits(value) {
            out.push(ConstraintKind::NodeKind);
        }
    }
    if let Some(lo) = &k.min_inclusive {
        if !matches!(cmp_numeric(value, lo), Some(Ordering::Greater | Ordering::Equal)) {
            out.push(ConstraintKind::MinInclusive);
        }
    }
    if let Some(hi) = &k.max_inclusive {
        if !matches!(cmp_numeric(value, hi), Some(Ordering::Less | Ordering::Equal)) {
            out.push(ConstraintKind::MaxInclusive);
        }
    }
    if let Some(list) = &k.in_values {
        if !list.contains(value) {
            out.push(ConstraintKind::In);
        }
    }
    if let Some(p) = &k.pattern {
        let ok = match (pattern_subject(value), regexes.get(p)) {
            (Some(s), Some(re)) => re.is_match(s),
            _ => false,
        };
        if !ok {
            out.push(ConstraintKind::Pattern);
        }
    }
    if let Some(f) = &k.forbidden_value {
        if value == f {
            out.push(ConstraintKind::ForbiddenValue);
        }
    }
    out
}

fn validate_shape(data: &Graph, shape: &Shape, regexes: &RegexCache) -> Vec<ValidationResult> {
    let mut ctx = Ctx { data, shape, regexes, out: Vec::new() };
    for focus in focus_nodes(data, shape) {
        for c in &shape.constraints {
            ctx.check(&focus, c);
        }
    }
    ctx.out
}

fn assemble(mut results: Vec<ValidationResult>) -> ValidationReport {
    results.sort();
    results.dedup();
    let conforms = !results.iter().any(|r| r.severity == Severity::Violation);
    ValidationReport { conforms, results }
}

/// Validates `data` against every shape. Each failed check yields one result
/// carrying the triples responsible for it; results are sorted by focus
/// node, path and constraint kind, and identical results collapse.
pub fn validate(data: &Graph, shapes: &[Shape]) -> Result<ValidationReport, ShapeError> {
    let regexes = compile_patterns(shapes)?;
    Ok(assemble(shapes.iter().flat_map(|s| validate_shape(data, s, &regexes)).collect()))
}

/// Validates many graphs against one shape set.
pub fn validate_batch(exec: Execution, graphs: &[Graph], shapes: &[Shape]) -> Result<Vec<ValidationReport>, ShapeError> {
    let regexes = compile_patterns(shapes)?;
    Ok(exec::map(exec, graphs, |g| assemble(shapes.iter().flat_map(|s| validate_shape(g, s, &regexes)).collect())))
}
