use std::collections::BTreeSet;

use serde::Serialize;

use super::{ExplainError, FactualExplanation};
use crate::exec::{self, Execution};
use crate::rdf::vocab::inst;
use crate::rdf::{Graph, Term, Triple};
use crate::shacl::{path_values, validate, ConstraintKind, PropertyPath, Shape, ValidationResult};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edit {
    pub removals: BTreeSet<Triple>,
    pub additions: BTreeSet<Triple>,
    /// `(old, new)` pairs, sorted.
    pub substitutions: Vec<(Triple, Triple)>,
}

impl Edit {
    pub fn cost(&self) -> usize {
        self.removals.len() + self.additions.len() + self.substitutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost() == 0
    }

    /// Fewer removals, then fewer additions, then canonical triple order.
    fn tie_key(&self) -> (usize, usize, &Self) {
        (self.removals.len(), self.additions.len(), self)
    }
}

pub fn apply_edit(g: &Graph, e: &Edit) -> Graph {
    let mut out = g.clone();
    for t in e.removals.iter().chain(e.substitutions.iter().map(|(old, _)| old)) {
        out.remove(t);
    }
    for t in e.additions.iter().chain(e.substitutions.iter().map(|(_, new)| new)) {
        out.insert(t.clone());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterfactualExplanation {
    pub violation_id: String,
    pub edit: Edit,
    pub cost: usize,
    pub restored: bool,
    /// Results still in scope (or newly raised for the norm) after the edit.
    pub remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Op {
    Remove(Triple),
    Add(Triple),
    Substitute(Triple, Triple),
}

/// Values the violated norm itself suggests for `path`: `in` lists, required
/// values, range bounds and declared repair values. A required path with no
/// such values and no typing constraint falls back to `inst:Placeholder`.
pub fn repair_vocabulary(shapes: &[Shape], norm: &crate::rdf::Iri, path: &PropertyPath) -> Vec<Term> {
    let constraints: Vec<_> =
        shapes.iter().filter(|s| &s.norm_id == norm).flat_map(|s| &s.constraints).filter(|c| &c.path == path).collect();
    let mut vocab = BTreeSet::new();
    for c in &constraints {
        let k = &c.checks;
        vocab.extend(k.in_values.iter().flatten().cloned());
        vocab.extend(k.has_value.iter().cloned());
        vocab.extend(k.min_inclusive.iter().cloned());
        vocab.extend(k.max_inclusive.iter().cloned());
        vocab.extend(k.repair_values.iter().cloned());
    }
    let required = constraints.iter().any(|c| c.checks.min_count.is_some_and(|n| n > 0));
    let typed = constraints.iter().any(|c| {
        let k = &c.checks;
        k.datatype.is_some() || k.class.is_some() || k.node_kind.is_some() || k.pattern.is_some() || k.in_values.is_some()
    });
    if vocab.is_empty() && required && !typed {
        vocab.insert(Term::iri(inst("Placeholder")));
    }
    vocab.into_iter().collect()
}

fn candidate_ops(g: &Graph, v: &FactualExplanation, vocab: &[Term]) -> Vec<Op> {
    let existing: Vec<Triple> = path_values(g, &v.focus, &v.path).into_iter().map(|(_, t)| t.clone()).collect();
    let fresh: Vec<Triple> =
        vocab.iter().filter_map(|val| v.path.triple(&v.focus, val)).filter(|t| !g.contains(t)).collect();
    let mut ops: Vec<Op> = existing.iter().cloned().map(Op::Remove).collect();
    ops.extend(fresh.iter().cloned().map(Op::Add));
    for old in &existing {
        for new in &fresh {
            ops.push(Op::Substitute(old.clone(), new.clone()));
        }
    }
    ops.sort();
    ops
}

fn build_edit(ops: &[&Op]) -> Option<Edit> {
    let mut touched_old = BTreeSet::new();
    let mut touched_new = BTreeSet::new();
    let mut e = Edit::default();
    for op in ops {
        match op {
            Op::Remove(t) => {
                if !touched_old.insert(t) {
                    return None;
                }
                e.removals.insert(t.clone());
            }
            Op::Add(t) => {
                if !touched_new.insert(t) {
                    return None;
                }
                e.additions.insert(t.clone());
            }
            Op::Substitute(a, b) => {
                if !touched_old.insert(a) || !touched_new.insert(b) {
                    return None;
                }
                e.substitutions.push((a.clone(), b.clone()));
            }
        }
    }
    e.substitutions.sort();
    Some(e)
}

/// All k-subsets of `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct Scorer<'a> {
    shapes: Vec<Shape>,
    v: &'a FactualExplanation,
    baseline_elsewhere: BTreeSet<ValidationResult>,
}

impl Scorer<'_> {
    fn in_scope(&self, r: &ValidationResult) -> bool {
        r.focus == self.v.focus && r.path == self.v.path
    }

    /// Remaining in-scope results plus new results for the norm elsewhere.
    fn remaining(&self, g: &Graph) -> Result<usize, ExplainError> {
        let report = validate(g, &self.shapes)?;
        Ok(report
            .results
            .iter()
            .filter(|r| self.in_scope(r) || !self.baseline_elsewhere.contains(*r))
            .count())
    }
}

pub fn explain_counterfactual(g_a: &Graph, shapes: &[Shape], v: &FactualExplanation, budget: usize) -> Result<CounterfactualExplanation, ExplainError> {
    explain_counterfactual_with(Execution::default(), g_a, shapes, v, budget)
}

/// Searches edits on the violated path at the focus by increasing cost up to
/// `budget`. An edit restores compliance when no result remains for the
/// violation's (focus, path) under its norm and the norm raises nothing new
/// elsewhere. Among restoring edits of least cost the one with the fewest
/// removals, then fewest additions, then least in canonical order wins. If
/// none restores, the edit leaving the fewest results is returned.
pub fn explain_counterfactual_with(
    exec: Execution,
    g_a: &Graph,
    shapes: &[Shape],
    v: &FactualExplanation,
    budget: usize,
) -> Result<CounterfactualExplanation, ExplainError> {
    if budget == 0 {
        return Err(ExplainError::ZeroBudget);
    }
    let norm_shapes: Vec<Shape> = shapes.iter().filter(|s| s.norm_id == v.norm_id).cloned().collect();
    let vocab = repair_vocabulary(&norm_shapes, &v.norm_id, &v.path);
    if vocab.is_empty() && v.kind == ConstraintKind::MinCount {
        return Err(ExplainError::EmptyRepairVocabulary { kind: v.kind, path: v.path.to_string() });
    }
    let baseline = validate(g_a, &norm_shapes)?;
    let scorer = Scorer {
        baseline_elsewhere: baseline.results.iter().filter(|r| !(r.focus == v.focus && r.path == v.path)).cloned().collect(),
        shapes: norm_shapes,
        v,
    };
    let finish = |edit: Edit, remaining: usize| CounterfactualExplanation {
        violation_id: v.violation_id.clone(),
        cost: edit.cost(),
        restored: remaining == 0,
        remaining,
        edit,
    };

    let base_remaining = scorer.remaining(g_a)?;
    if base_remaining == 0 {
        return Ok(finish(Edit::default(), 0));
    }
    let ops = candidate_ops(g_a, v, &vocab);
    let mut best: (usize, Edit) = (base_remaining, Edit::default());
    for k in 1..=budget.min(ops.len()) {
        let edits: Vec<Edit> =
            combinations(ops.len(), k).into_iter().filter_map(|c| build_edit(&c.iter().map(|&i| &ops[i]).collect::<Vec<_>>())).collect();
        let scored = exec::map(exec, &edits, |e| scorer.remaining(&apply_edit(g_a, e)));
        let mut level: Vec<(usize, &Edit)> = Vec::with_capacity(edits.len());
        for (e, r) in edits.iter().zip(scored) {
            level.push((r?, e));
        }
        if let Some((_, e)) = level.iter().filter(|(r, _)| *r == 0).min_by(|a, b| a.1.tie_key().cmp(&b.1.tie_key())) {
            return Ok(finish((*e).clone(), 0));
        }
        if let Some((r, e)) = level.iter().min_by(|a, b| (a.0, a.1.tie_key()).cmp(&(b.0, b.1.tie_key()))) {
            if *r < best.0 {
                best = (*r, (*e).clone());
            }
        }
    }
    Ok(finish(best.1, best.0))
}
