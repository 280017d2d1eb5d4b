//! Basic graph patterns: conjunctive triple patterns joined on shared
//! variables, with optional comparison filters.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::graph::{Graph, Triple};
use super::term::Term;
use super::RdfError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Const(Term),
    Var(String),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Term> {
        match self {
            PatternTerm::Const(t) => Some(t),
            PatternTerm::Var(_) => None,
        }
    }

    fn resolve<'a>(&'a self, binding: &'a Binding) -> Option<&'a Term> {
        match self {
            PatternTerm::Const(t) => Some(t),
            PatternTerm::Var(v) => binding.get(v),
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Const(t)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Const(t) => write!(f, "{t}"),
            PatternTerm::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "=" => CmpOp::Eq,
            "!=" | "≠" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" | "≤" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" | "≥" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Filter {
    pub var: String,
    pub op: CmpOp,
    pub value: Term,
}

impl Filter {
    pub fn new(var: &str, op: CmpOp, value: Term) -> Self {
        Filter { var: var.to_string(), op, value }
    }

    /// Equality is term equality. Ordering comparisons hold only between
    /// numeric literals and compare exact values.
    pub fn accepts(&self, term: &Term) -> bool {
        match self.op {
            CmpOp::Eq => term == &self.value,
            CmpOp::Ne => term != &self.value,
            op => {
                let (Some(a), Some(b)) = (term.numeric_value(), self.value.numeric_value()) else {
                    return false;
                };
                let ord = a.cmp(&b);
                match op {
                    CmpOp::Lt => ord == Ordering::Less,
                    CmpOp::Le => ord != Ordering::Greater,
                    CmpOp::Gt => ord == Ordering::Greater,
                    CmpOp::Ge => ord != Ordering::Less,
                    CmpOp::Eq | CmpOp::Ne => unreachable!(),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
    pub filter: Option<Filter>,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern { subject, predicate, object, filter: None }
    }

    pub fn with_filter(mut self, filter: Filter) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.positions().into_iter().filter_map(PatternTerm::as_var).collect()
    }

    pub fn bound_positions(&self) -> usize {
        self.positions().into_iter().filter(|p| p.as_const().is_some()).count()
    }

    /// Extends `binding` so that this pattern matches `triple`, ignoring the
    /// filter. Returns `None` on conflict.
    pub fn unify(&self, triple: &Triple, binding: &Binding) -> Option<Binding> {
        let mut out = binding.clone();
        let pred = Term::Iri(triple.predicate().clone());
        for (pat, term) in [(&self.subject, triple.subject()), (&self.predicate, &pred), (&self.object, triple.object())] {
            match pat {
                PatternTerm::Const(c) => {
                    if c != term {
                        return None;
                    }
                }
                PatternTerm::Var(v) => match out.get(v) {
                    Some(existing) if existing != term => return None,
                    Some(_) => {}
                    None => {
                        out.insert(v.clone(), term.clone());
                    }
                },
            }
        }
        Some(out)
    }

    pub fn matches_triple(&self, triple: &Triple) -> bool {
        self.unify(triple, &Binding::new()).is_some()
    }

    /// Ground instance under a binding covering all variables.
    pub fn instantiate(&self, binding: &Binding) -> Option<Triple> {
        let s = self.subject.resolve(binding)?.clone();
        let p = self.predicate.resolve(binding)?.as_iri()?.clone();
        let o = self.object.resolve(binding)?.clone();
        Triple::new(s, p, o).ok()
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)?;
        if let Some(flt) = &self.filter {
            write!(f, " filter ?{} {} {}", flt.var, flt.op.symbol(), flt.value)?;
        }
        Ok(())
    }
}

pub type Binding = BTreeMap<String, Term>;

/// Evaluates a conjunction of patterns. Filters are applied after the join,
/// so results do not depend on pattern order; a filter on a variable that no
/// pattern mentions is an error. Results are sorted.
pub fn match_patterns(graph: &Graph, patterns: &[TriplePattern]) -> Result<Vec<Binding>, RdfError> {
    let vars: BTreeSet<&str> = patterns.iter().flat_map(TriplePattern::variables).collect();
    let filters: Vec<&Filter> = patterns.iter().filter_map(|p| p.filter.as_ref()).collect();
    if let Some(f) = filters.iter().find(|f| !vars.contains(f.var.as_str())) {
        return Err(RdfError::UnboundFilterVariable(f.var.clone()));
    }

    // Most selective first: more bound positions means a smaller candidate set.
    let mut order: Vec<&TriplePattern> = patterns.iter().collect();
    order.sort_by_key(|p| std::cmp::Reverse(p.bound_positions()));

    let mut solutions = vec![Binding::new()];
    for pattern in order {
        let mut next = Vec::new();
        for binding in &solutions {
            let candidates: Box<dyn Iterator<Item = &Triple>> = match pattern.subject.resolve(binding) {
                Some(s) => Box::new(graph.with_subject(s).collect::<Vec<_>>().into_iter()),
                None => Box::new(graph.iter()),
            };
            for triple in candidates {
                if let Some(b) = pattern.unify(triple, binding) {
                    next.push(b);
                }
            }
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }
    solutions.retain(|b| filters.iter().all(|f| b.get(&f.var).is_some_and(|t| f.accepts(t))));
    solutions.sort();
    solutions.dedup();
    Ok(solutions)
}
