//! Factual explanations, minimum-cost counterfactual repairs and the template
//! renderer.

mod counterfactual;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::manifest::Manifest;
use crate::rdf::{match_patterns, Graph, Iri, Term, Triple};
use crate::shacl::{ConstraintKind, PropertyPath, Severity, ShapeError, ValidationReport};

pub use counterfactual::{apply_edit, explain_counterfactual, explain_counterfactual_with, repair_vocabulary, CounterfactualExplanation, Edit};
pub use render::{render, AgentNames, RenderedExplanation, TemplateSet, SLOTS};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("offending triple {0} is not in the agent graph")]
    ReportMismatch(Box<Triple>),
    #[error("constraint {kind} on {path} needs an addition but has no repair vocabulary")]
    EmptyRepairVocabulary { kind: ConstraintKind, path: String },
    #[error("search budget must be at least 1")]
    ZeroBudget,
    #[error("no template for constraint kind {0}")]
    MissingTemplate(ConstraintKind),
    #[error("template {template} uses unknown slot {{{slot}}}")]
    UnknownSlot { template: String, slot: String },
    #[error("cannot read templates: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactualExplanation {
    pub violation_id: String,
    pub agent: Iri,
    pub step: u64,
    pub norm_id: Iri,
    pub source_shape: Iri,
    pub focus: Term,
    pub path: PropertyPath,
    pub kind: ConstraintKind,
    pub message: String,
    /// The result's offending triples; all lie in the agent graph.
    pub offending: BTreeSet<Triple>,
    /// The agent's own triples pointing at the focus.
    pub decision: BTreeSet<Triple>,
    /// Triples that made the focus fall under the norm's conditions.
    pub evidence: BTreeSet<Triple>,
}

fn violation_id(agent: &Iri, step: u64, r: &crate::shacl::ValidationResult) -> String {
    let mut h = Sha256::new();
    for part in [agent.as_str(), &step.to_string(), r.norm_id.as_str(), r.source_shape.as_str(), &r.focus.to_string(), &r.path.to_string(), r.kind.id()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    if let Some(v) = &r.offending_value {
        h.update(v.to_string().as_bytes());
    }
    h.update([0u8]);
    for t in &r.offending_triples {
        h.update(t.to_string().as_bytes());
        h.update(b"\n");
    }
    format!("V-{}", &hex::encode(h.finalize())[..12])
}

/// One explanation per violation-severity result of `report`.
pub fn explain_factual(report: &ValidationReport, g_a: &Graph, agent: &Iri, step: u64) -> Result<Vec<FactualExplanation>, ExplainError> {
    let agent_term = Term::Iri(agent.clone());
    let mut out = Vec::new();
    for r in report.results.iter().filter(|r| r.severity == Severity::Violation) {
        if let Some(t) = r.offending_triples.iter().find(|t| !g_a.contains(t)) {
            return Err(ExplainError::ReportMismatch(Box::new(t.clone())));
        }
        out.push(FactualExplanation {
            violation_id: violation_id(agent, step, r),
            agent: agent.clone(),
            step,
            norm_id: r.norm_id.clone(),
            source_shape: r.source_shape.clone(),
            focus: r.focus.clone(),
            path: r.path.clone(),
            kind: r.kind,
            message: r.message.clone(),
            offending: r.offending_triples.clone(),
            decision: g_a.with_subject(&agent_term).filter(|t| t.object() == &r.focus).cloned().collect(),
            evidence: BTreeSet::new(),
        });
    }
    Ok(out)
}

/// Triples of `g` that satisfy the attribute and conditions of the statement
/// behind `norm` at `focus`. Empty when the norm is not a manifest statement.
pub fn condition_evidence(m: &Manifest, g: &Graph, norm: &Iri, focus: &Term) -> BTreeSet<Triple> {
    let Some(stmt) = m.statement(norm) else { return BTreeSet::new() };
    let Some(var) = stmt.focus_var() else { return BTreeSet::new() };
    let guard = stmt.guard_patterns();
    let Ok(bindings) = match_patterns(g, &guard) else { return BTreeSet::new() };
    bindings
        .iter()
        .filter(|b| b.get(var) == Some(focus))
        .flat_map(|b| guard.iter().filter_map(|p| p.instantiate(b)))
        .filter(|t| g.contains(t))
        .collect()
}

/// Fills [`FactualExplanation::evidence`] from the manifest.
pub fn attach_evidence(explanations: &mut [FactualExplanation], m: &Manifest, g: &Graph) {
    for e in explanations {
        e.evidence = condition_evidence(m, g, &e.norm_id, &e.focus);
    }
}

/// Display form used in explanation text: the local name in quotes.
pub(crate) fn quoted(t: &Term) -> String {
    format!("'{}'", t.display_name())
}

pub(crate) fn group_by_subject(ts: &BTreeSet<Triple>) -> BTreeMap<&Term, Vec<&Triple>> {
    let mut m: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
    for t in ts {
        m.entry(t.subject()).or_default().push(t);
    }
    m
}

#[cfg(test)]
mod tests;
