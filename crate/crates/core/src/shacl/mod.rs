//! SHACL subset: node shapes with class/node targets and conjunctive
//! property constraints. No SPARQL constraints, no recursion and no logical
//! combinators.
//!
//! Two engine-specific terms extend the vocabulary on property nodes:
//! `inst:forbiddenValue` (no value on the path may equal the given term) and
//! `inst:repairValue` (a permitted substitute offered to counterfactual
//! search). Shape nodes carry `inst:normFamily` and `inst:normId`.

mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rdf::vocab::{inst, rdf, sh, INST, SH};
use crate::rdf::{Graph, Iri, Literal, Term, Triple};

pub use validate::{focus_nodes, path_values, validate, validate_batch, ValidationReport, ValidationResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("shape {0} has no target")]
    MissingTarget(String),
    #[error("shape {shape}: missing {field}")]
    MissingField { shape: String, field: &'static str },
    #[error("shape {shape}: unsupported term {term}")]
    Unsupported { shape: String, term: String },
    #[error("shape {shape}: {term} expects {expected}, got {found}")]
    TypeMismatch { shape: String, term: String, expected: &'static str, found: String },
    #[error("shape {shape}: {detail}")]
    Inconsistent { shape: String, detail: String },
    #[error("invalid sh:pattern `{pattern}`: {detail}")]
    Regex { pattern: String, detail: String },
}

/// The closed taxonomy of norm families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormFamily {
    Ethical,
    LocalLaw,
    InternationalLaw,
    Technical,
    Physical,
}

impl NormFamily {
    pub const ALL: [NormFamily; 5] =
        [NormFamily::Ethical, NormFamily::LocalLaw, NormFamily::InternationalLaw, NormFamily::Technical, NormFamily::Physical];

    pub fn keyword(self) -> &'static str {
        match self {
            NormFamily::Ethical => "ethical",
            NormFamily::LocalLaw => "local-law",
            NormFamily::InternationalLaw => "international-law",
            NormFamily::Technical => "technical",
            NormFamily::Physical => "physical",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        NormFamily::ALL.into_iter().find(|f| f.keyword() == s)
    }

    pub fn iri(self) -> Iri {
        Iri::new(inst(match self {
            NormFamily::Ethical => "Ethical",
            NormFamily::LocalLaw => "LocalLaw",
            NormFamily::InternationalLaw => "InternationalLaw",
            NormFamily::Technical => "Technical",
            NormFamily::Physical => "Physical",
        }))
    }

    pub fn from_iri(iri: &Iri) -> Option<Self> {
        NormFamily::ALL.into_iter().find(|f| &f.iri() == iri)
    }
}

impl fmt::Display for NormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Violation,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Class(Iri),
    Node(Term),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PropertyPath {
    pub predicate: Iri,
    pub direction: Direction,
}

impl PropertyPath {
    pub fn forward(predicate: impl Into<Iri>) -> Self {
        PropertyPath { predicate: predicate.into(), direction: Direction::Forward }
    }

    pub fn inverse(predicate: impl Into<Iri>) -> Self {
        PropertyPath { predicate: predicate.into(), direction: Direction::Inverse }
    }

    /// The triple linking `focus` to `value` along this path, if it can exist.
    pub fn triple(&self, focus: &Term, value: &Term) -> Option<Triple> {
        match self.direction {
            Direction::Forward => Triple::new(focus.clone(), self.predicate.clone(), value.clone()).ok(),
            Direction::Inverse => Triple::new(value.clone(), self.predicate.clone(), focus.clone()).ok(),
        }
    }
}

impl fmt::Display for PropertyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "{}", self.predicate),
            Direction::Inverse => write!(f, "^{}", self.predicate),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Iri,
    Literal,
    Blank,
}

impl NodeKind {
    pub fn admits(self, term: &Term) -> bool {
        match self {
            NodeKind::Iri => term.is_iri(),
            NodeKind::Literal => term.is_literal(),
            NodeKind::Blank => term.is_blank(),
        }
    }

    fn iri(self) -> Iri {
        Iri::new(sh(match self {
            NodeKind::Iri => "IRI",
            NodeKind::Literal => "Literal",
            NodeKind::Blank => "BlankNode",
        }))
    }
}

/// Stable identifiers for report results and template lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    MinCount,
    MaxCount,
    Datatype,
    Class,
    NodeKind,
    MinInclusive,
    MaxInclusive,
    In,
    HasValue,
    Pattern,
    ForbiddenValue,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 11] = [
        ConstraintKind::MinCount,
        ConstraintKind::MaxCount,
        ConstraintKind::Datatype,
        ConstraintKind::Class,
        ConstraintKind::NodeKind,
        ConstraintKind::MinInclusive,
        ConstraintKind::MaxInclusive,
        ConstraintKind::In,
        ConstraintKind::HasValue,
        ConstraintKind::Pattern,
        ConstraintKind::ForbiddenValue,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ConstraintKind::MinCount => "min-count",
            ConstraintKind::MaxCount => "max-count",
            ConstraintKind::Datatype => "datatype",
            ConstraintKind::Class => "class",
            ConstraintKind::NodeKind => "node-kind",
            ConstraintKind::MinInclusive => "min-inclusive",
            ConstraintKind::MaxInclusive => "max-inclusive",
            ConstraintKind::In => "in",
            ConstraintKind::HasValue => "has-value",
            ConstraintKind::Pattern => "pattern",
            ConstraintKind::ForbiddenValue => "forbidden-value",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        ConstraintKind::ALL.into_iter().find(|k| k.id() == s)
    }

    /// Kinds whose results point at one offending value.
    pub fn is_value_level(self) -> bool {
        !matches!(self, ConstraintKind::MinCount | ConstraintKind::MaxCount | ConstraintKind::HasValue)
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for ConstraintKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Checks {
    pub min_count: Option<usize>,
    pub max_count: Option<usize>,
    pub datatype: Option<Iri>,
    pub class: Option<Iri>,
    pub node_kind: Option<NodeKind>,
    pub min_inclusive: Option<Term>,
    pub max_inclusive: Option<Term>,
    pub in_values: Option<Vec<Term>>,
    pub has_value: Option<Term>,
    pub pattern: Option<String>,
    pub forbidden_value: Option<Term>,
    /// Not a check: substitutes offered to the repair search.
    pub repair_values: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyConstraint {
    pub path: PropertyPath,
    pub checks: Checks,
}

impl PropertyConstraint {
    pub fn new(path: PropertyPath) -> Self {
        PropertyConstraint { path, checks: Checks::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub id: Iri,
    pub targets: Vec<Target>,
    pub constraints: Vec<PropertyConstraint>,
    pub severity: Severity,
    pub message: String,
    pub family: NormFamily,
    pub norm_id: Iri,
}

impl Shape {
    /// A violation-severity shape with no constraints yet.
    pub fn new(id: impl Into<Iri>, target: Target, family: NormFamily, norm_id: impl Into<Iri>) -> Self {
        Shape {
            id: id.into(),
            targets: vec![target],
            constraints: Vec::new(),
            severity: Severity::Violation,
            message: String::new(),
            family,
            norm_id: norm_id.into(),
        }
    }

    pub fn with_constraint(mut self, c: PropertyConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn with_message(mut self, m: &str) -> Self {
        self.message = m.to_string();
        self
    }

    /// Checks the invariants that [`parse_shapes`] enforces.
    pub fn check(&self) -> Result<(), ShapeError> {
        let name = self.id.to_string();
        if self.targets.is_empty() {
            return Err(ShapeError::MissingTarget(name));
        }
        if self.severity == Severity::Warning && self.family != NormFamily::Technical {
            return Err(ShapeError::Inconsistent { shape: name, detail: "only technical norms may use warning severity".into() });
        }
        for c in &self.constraints {
            if let (Some(lo), Some(hi)) = (c.checks.min_count, c.checks.max_count) {
                if lo > hi {
                    return Err(ShapeError::Inconsistent { shape: name, detail: format!("minCount {lo} > maxCount {hi}") });
                }
            }
            if matches!(&c.checks.in_values, Some(v) if v.is_empty()) {
                return Err(ShapeError::Inconsistent { shape: name, detail: "empty sh:in list".into() });
            }
            for bound in [&c.checks.min_inclusive, &c.checks.max_inclusive].into_iter().flatten() {
                if bound.numeric_value().is_none() {
                    return Err(ShapeError::TypeMismatch {
                        shape: name,
                        term: "range bound".into(),
                        expected: "numeric literal",
                        found: bound.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

const SHAPE_TERMS: &[&str] = &["targetClass", "targetNode", "property", "severity", "message"];
const PROPERTY_TERMS: &[&str] = &[
    "path", "minCount", "maxCount", "datatype", "class", "nodeKind", "minInclusive", "maxInclusive", "in", "hasValue",
    "pattern", "name", "description",
];

struct Reader<'g> {
    g: &'g Graph,
    shape: String,
}

impl Reader<'_> {
    fn mismatch(&self, term: &str, expected: &'static str, found: &Term) -> ShapeError {
        ShapeError::TypeMismatch { shape: self.shape.clone(), term: term.to_string(), expected, found: found.to_string() }
    }

    fn iri(&self, term: &str, value: &Term) -> Result<Iri, ShapeError> {
        value.as_iri().cloned().ok_or_else(|| self.mismatch(term, "IRI", value))
    }

    fn count(&self, term: &str, value: &Term) -> Result<usize, ShapeError> {
        value
            .as_literal()
            .filter(|l| l.datatype().as_str() == crate::rdf::vocab::xsd("integer"))
            .and_then(|l| l.lexical().parse::<usize>().ok())
            .ok_or_else(|| self.mismatch(term, "non-negative integer", value))
    }

    fn string(&self, term: &str, value: &Term) -> Result<String, ShapeError> {
        value.as_literal().map(|l| l.lexical().to_string()).ok_or_else(|| self.mismatch(term, "string literal", value))
    }

    fn list(&self, head: &Term) -> Result<Vec<Term>, ShapeError> {
        let first = Iri::new(rdf("first"));
        let rest = Iri::new(rdf("rest"));
        let nil = Term::iri(rdf("nil"));
        let mut out = Vec::new();
        let mut node = head.clone();
        let mut guard = 0usize;
        while node != nil {
            let item = self.g.objects(&node, &first).next().cloned().ok_or_else(|| self.mismatch("in", "RDF collection", head))?;
            out.push(item);
            let next = self.g.objects(&node, &rest).next().cloned().ok_or_else(|| self.mismatch("in", "RDF collection", head))?;
            node = next;
            guard += 1;
            if guard > self.g.len() {
                return Err(self.mismatch("in", "acyclic RDF collection", head));
            }
        }
        Ok(out)
    }

    fn path(&self, value: &Term) -> Result<PropertyPath, ShapeError> {
        match value {
            Term::Iri(i) => Ok(PropertyPath::forward(i.clone())),
            Term::Blank(_) => {
                let inverse = Iri::new(sh("inversePath"));
                let mut preds = self.g.with_subject(value);
                match (preds.next(), preds.next()) {
                    (Some(t), None) if t.predicate() == &inverse => Ok(PropertyPath::inverse(self.iri("inversePath", t.object())?)),
                    _ => Err(ShapeError::Unsupported { shape: self.shape.clone(), term: "complex sh:path".into() }),
                }
            }
            other => Err(self.mismatch("path", "IRI or sh:inversePath node", other)),
        }
    }

    fn property(&self, node: &Term) -> Result<PropertyConstraint, ShapeError> {
        let mut path = None;
        let mut c = Checks::default();
        for t in self.g.with_subject(node) {
            let p = t.predicate().as_str();
            let v = t.object();
            if p == rdf("type") {
                continue;
            }
            if let Some(local) = p.strip_prefix(SH) {
                if !PROPERTY_TERMS.contains(&local) {
                    return Err(ShapeError::Unsupported { shape: self.shape.clone(), term: format!("sh:{local}") });
                }
                match local {
                    "path" => path = Some(self.path(v)?),
                    "minCount" => c.min_count = Some(self.count(local, v)?),
                    "maxCount" => c.max_count = Some(self.count(local, v)?),
                    "datatype" => c.datatype = Some(self.iri(local, v)?),
                    "class" => c.class = Some(self.iri(local, v)?),
                    "nodeKind" => {
                        let k = self.iri(local, v)?;
                        c.node_kind = Some(
                            [NodeKind::Iri, NodeKind::Literal, NodeKind::Blank]
                                .into_iter()
                                .find(|n| n.iri() == k)
                                .ok_or_else(|| self.mismatch(local, "sh:IRI, sh:Literal or sh:BlankNode", v))?,
                        );
                    }
                    "minInclusive" => c.min_inclusive = Some(v.clone()),
                    "maxInclusive" => c.max_inclusive = Some(v.clone()),
                    "in" => c.in_values = Some(self.list(v)?),
                    "hasValue" => c.has_value = Some(v.clone()),
                    "pattern" => c.pattern = Some(self.string(local, v)?),
                    _ => {}
                }
            } else if let Some(local) = p.strip_prefix(INST) {
                match local {
                    "forbiddenValue" => c.forbidden_value = Some(v.clone()),
                    "repairValue" => c.repair_values.push(v.clone()),
                    _ => return Err(ShapeError::Unsupported { shape: self.shape.clone(), term: format!("inst:{local}") }),
                }
            }
        }
        let path = path.ok_or(ShapeError::MissingField { shape: self.shape.clone(), field: "sh:path" })?;
        Ok(PropertyConstraint { path, checks: c })
    }
}

/// Reads every `sh:NodeShape` in the graph. Unknown `sh:` terms are errors.
pub fn parse_shapes(g: &Graph) -> Result<Vec<Shape>, ShapeError> {
    let node_shape = Term::iri(sh("NodeShape"));
    let ty = Iri::new(rdf("type"));
    let mut shape_nodes: Vec<&Term> = g.subjects_with(&ty, &node_shape).collect();
    shape_nodes.sort();
    shape_nodes.dedup();
    let mut shapes = Vec::with_capacity(shape_nodes.len());
    for node in shape_nodes {
        let id = node.as_iri().cloned().ok_or_else(|| ShapeError::TypeMismatch {
            shape: node.to_string(),
            term: "sh:NodeShape".into(),
            expected: "IRI-named shape",
            found: node.to_string(),
        })?;
        let reader = Reader { g, shape: id.to_string() };
        let mut targets = Vec::new();
        let mut constraints = Vec::new();
        let mut severity = Severity::Violation;
        let mut message = String::new();
        let mut family = None;
        let mut norm_id = None;
        for t in g.with_subject(node) {
            let p = t.predicate().as_str();
            let v = t.object();
            if let Some(local) = p.strip_prefix(SH) {
                if !SHAPE_TERMS.contains(&local) {
                    return Err(ShapeError::Unsupported { shape: reader.shape.clone(), term: format!("sh:{local}") });
                }
                match local {
                    "targetClass" => targets.push(Target::Class(reader.iri(local, v)?)),
                    "targetNode" => targets.push(Target::Node(v.clone())),
                    "property" => constraints.push(reader.property(v)?),
                    "severity" => {
                        severity = match v.as_iri().map(Iri::as_str) {
                            Some(s) if s == sh("Violation") => Severity::Violation,
                            Some(s) if s == sh("Warning") => Severity::Warning,
                            _ => return Err(reader.mismatch(local, "sh:Violation or sh:Warning", v)),
                        }
                    }
                    "message" => message = reader.string(local, v)?,
                    _ => {}
                }
            } else if let Some(local) = p.strip_prefix(INST) {
                match local {
                    "normFamily" => {
                        let iri = reader.iri(local, v)?;
                        family = Some(NormFamily::from_iri(&iri).ok_or_else(|| reader.mismatch(local, "norm family", v))?);
                    }
                    "normId" => norm_id = Some(reader.iri(local, v)?),
                    _ => return Err(ShapeError::Unsupported { shape: reader.shape.clone(), term: format!("inst:{local}") }),
                }
            }
        }
        targets.sort();
        constraints.sort_by(|a, b| a.path.cmp(&b.path));
        let shape = Shape {
            norm_id: norm_id.unwrap_or_else(|| id.clone()),
            family: family.ok_or(ShapeError::MissingField { shape: id.to_string(), field: "inst:normFamily" })?,
            id,
            targets,
            constraints,
            severity,
            message,
        };
        shape.check()?;
        shapes.push(shape);
    }
    Ok(shapes)
}

/// Graph encoding of shapes, readable by [`parse_shapes`].
pub fn shapes_to_graph(shapes: &[Shape]) -> Graph {
    let mut g = Graph::new();
    let ty = Iri::new(rdf("type"));
    let s = |local: &str| Iri::new(sh(local));
    let push = |g: &mut Graph, subj: &Term, p: Iri, o: Term| {
        g.insert(Triple::new(subj.clone(), p, o).expect("shape encoding is well formed"));
    };
    for (si, shape) in shapes.iter().enumerate() {
        let node = Term::Iri(shape.id.clone());
        push(&mut g, &node, ty.clone(), Term::iri(sh("NodeShape")));
        for t in &shape.targets {
            match t {
                Target::Class(c) => push(&mut g, &node, s("targetClass"), Term::Iri(c.clone())),
                Target::Node(n) => push(&mut g, &node, s("targetNode"), n.clone()),
            }
        }
        if shape.severity == Severity::Warning {
            push(&mut g, &node, s("severity"), Term::iri(sh("Warning")));
        }
        if !shape.message.is_empty() {
            push(&mut g, &node, s("message"), Term::string(&shape.message));
        }
        push(&mut g, &node, Iri::new(inst("normFamily")), Term::Iri(shape.family.iri()));
        push(&mut g, &node, Iri::new(inst("normId")), Term::Iri(shape.norm_id.clone()));
        for (pi, c) in shape.constraints.iter().enumerate() {
            let pn = Term::blank(format!("s{si}p{pi}"));
            push(&mut g, &node, s("property"), pn.clone());
            match c.path.direction {
                Direction::Forward => push(&mut g, &pn, s("path"), Term::Iri(c.path.predicate.clone())),
                Direction::Inverse => {
                    let inv = Term::blank(format!("s{si}p{pi}path"));
                    push(&mut g, &pn, s("path"), inv.clone());
                    push(&mut g, &inv, s("inversePath"), Term::Iri(c.path.predicate.clone()));
                }
            }
            let k = &c.checks;
            if let Some(n) = k.min_count {
                push(&mut g, &pn, s("minCount"), Term::Literal(Literal::integer(n as u64)));
            }
            if let Some(n) = k.max_count {
                push(&mut g, &pn, s("maxCount"), Term::Literal(Literal::integer(n as u64)));
            }
            if let Some(d) = &k.datatype {
                push(&mut g, &pn, s("datatype"), Term::Iri(d.clone()));
            }
            if let Some(d) = &k.class {
                push(&mut g, &pn, s("class"), Term::Iri(d.clone()));
            }
            if let Some(n) = k.node_kind {
                push(&mut g, &pn, s("nodeKind"), Term::Iri(n.iri()));
            }
            if let Some(v) = &k.min_inclusive {
                push(&mut g, &pn, s("minInclusive"), v.clone());
            }
            if let Some(v) = &k.max_inclusive {
                push(&mut g, &pn, s("maxInclusive"), v.clone());
            }
            if let Some(vals) = &k.in_values {
                let nodes: Vec<Term> = (0..vals.len()).map(|i| Term::blank(format!("s{si}p{pi}in{i}"))).collect();
                push(&mut g, &pn, s("in"), nodes.first().cloned().unwrap_or_else(|| Term::iri(rdf("nil"))));
                for (i, v) in vals.iter().enumerate() {
                    push(&mut g, &nodes[i], Iri::new(rdf("first")), v.clone());
                    let rest = nodes.get(i + 1).cloned().unwrap_or_else(|| Term::iri(rdf("nil")));
                    push(&mut g, &nodes[i], Iri::new(rdf("rest")), rest);
                }
            }
            if let Some(v) = &k.has_value {
                push(&mut g, &pn, s("hasValue"), v.clone());
            }
            if let Some(p) = &k.pattern {
                push(&mut g, &pn, s("pattern"), Term::string(p));
            }
            if let Some(v) = &k.forbidden_value {
                push(&mut g, &pn, Iri::new(inst("forbiddenValue")), v.clone());
            }
            for v in &k.repair_values {
                push(&mut g, &pn, Iri::new(inst("repairValue")), v.clone());
            }
        }
    }
    g
}

/// Shapes grouped by the norm they encode.
pub fn shapes_by_norm(shapes: &[Shape]) -> BTreeMap<&Iri, Vec<&Shape>> {
    let mut out: BTreeMap<&Iri, Vec<&Shape>> = BTreeMap::new();
    for s in shapes {
        out.entry(&s.norm_id).or_default().push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use crate::rdf::vocab::EX;

    const CONTRACT_SHAPE: &str = r#"
        ex:ContractShape a sh:NodeShape ;
            sh:targetClass ex:Contract ;
            inst:normFamily inst:LocalLaw ;
            inst:normId ex:Rule-1 ;
            sh:property _:p .
        _:p sh:path ex:counterparty ; sh:minCount 1 .
    "#;

    #[test]
    fn single_min_count_shape() {
        let shapes = parse_shapes(&parse_turtle(CONTRACT_SHAPE).unwrap()).unwrap();
        assert_eq!(shapes.len(), 1);
        let s = &shapes[0];
        assert_eq!(s.targets, vec![Target::Class(Iri::new(format!("{EX}Contract")))]);
        assert_eq!(s.constraints.len(), 1);
        assert_eq!(s.constraints[0].checks.min_count, Some(1));
        assert_eq!(s.norm_id, Iri::new(format!("{EX}Rule-1")));
    }

    #[test]
    fn no_node_shapes() {
        assert!(parse_shapes(&parse_turtle("ex:a ex:b ex:c .").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn rejects_unknown_sh_terms() {
        let src = CONTRACT_SHAPE.replace("sh:minCount 1", "sh:qualifiedMinCount 1");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::Unsupported { .. })));
        let src = CONTRACT_SHAPE.replace("sh:targetClass ex:Contract ;", "sh:or ( ex:A ) ;");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::Unsupported { .. })));
    }

    #[test]
    fn rejects_missing_target_and_bad_values() {
        let src = CONTRACT_SHAPE.replace("sh:targetClass ex:Contract ;", "");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::MissingTarget(_))));
        let src = CONTRACT_SHAPE.replace("sh:minCount 1", "sh:minCount \"one\"");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::TypeMismatch { .. })));
        let src = CONTRACT_SHAPE.replace("sh:minCount 1", "sh:minCount 2 ; sh:maxCount 1");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::Inconsistent { .. })));
        let src = CONTRACT_SHAPE.replace("sh:minCount 1", "sh:in ()");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::Inconsistent { .. })));
        let src = CONTRACT_SHAPE.replace("inst:normFamily inst:LocalLaw ;", "");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::MissingField { .. })));
        let src = CONTRACT_SHAPE.replace("sh:targetClass ex:Contract ;", "sh:targetClass ex:Contract ; sh:severity sh:Warning ;");
        assert!(matches!(parse_shapes(&parse_turtle(&src).unwrap()), Err(ShapeError::Inconsistent { .. })));
    }

    #[test]
    fn graph_encoding_round_trips() {
        let src = r#"
            ex:S a sh:NodeShape ; sh:targetNode ex:n ; sh:targetClass ex:C ;
                sh:severity sh:Warning ; sh:message "tech" ;
                inst:normFamily inst:Technical ; sh:property _:a , _:b .
            _:a sh:path ex:speed ; sh:minInclusive 0 ; sh:maxInclusive 30.5 ; sh:datatype xsd:decimal ;
                sh:in ( 1.0 2.0 ) ; sh:pattern "^[0-9]" .
            _:b sh:path _:inv ; sh:class ex:Agent ; sh:nodeKind sh:IRI ; sh:maxCount 2 ;
                inst:forbiddenValue ex:Bad ; inst:repairValue ex:Good ; sh:hasValue ex:Ok .
            _:inv sh:inversePath ex:owns .
        "#;
        let shapes = parse_shapes(&parse_turtle(src).unwrap()).unwrap();
        let again = parse_shapes(&shapes_to_graph(&shapes)).unwrap();
        assert_eq!(shapes, again);
        assert_eq!(shapes[0].constraints.len(), 2);
        assert!(shapes[0].constraints.iter().any(|c| c.path.direction == Direction::Inverse));
    }
}
