//! Perception of a decision as a triple set, masks, the IoU test and subset
//! alignment.
//!
//! Permit statements pass when the IoU between the agent's in-scope triples
//! and the required mask reaches the threshold. Forbid statements pass only
//! when the agent's graph and the forbid mask are disjoint, whatever the
//! threshold.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::manifest::{MaskMode, MaskSpec};
use crate::rdf::{Graph, Iri, Term, Triple};
use crate::ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplianceError {
    #[error("decision relation {0} is not an IRI")]
    RelationNotIri(String),
    #[error("decision subject {0} cannot carry a relation")]
    BadTriple(String),
    #[error("IoU is undefined when both masks are empty")]
    BothMasksEmpty,
    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub agent: Iri,
    pub relation: Term,
    pub object: Term,
    pub context: Graph,
    pub step: u64,
}

/// The agent graph for one step: the decision triple plus its context.
pub fn perceive(d: &Decision) -> Result<Graph, ComplianceError> {
    let rel = d.relation.as_iri().ok_or_else(|| ComplianceError::RelationNotIri(d.relation.to_string()))?;
    let core = Triple::new(Term::Iri(d.agent.clone()), rel.clone(), d.object.clone())
        .map_err(|e| ComplianceError::BadTriple(e.to_string()))?;
    let mut g = d.context.clone();
    g.insert(core);
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskOrigin {
    Agent,
    Institutional,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    pub triples: BTreeSet<Triple>,
    pub origin: MaskOrigin,
    pub statement_id: Option<Iri>,
}

impl Mask {
    pub fn agent(triples: impl IntoIterator<Item = Triple>) -> Self {
        Mask { triples: triples.into_iter().collect(), origin: MaskOrigin::Agent, statement_id: None }
    }

    pub fn institutional(statement: Iri, triples: impl IntoIterator<Item = Triple>) -> Self {
        Mask { triples: triples.into_iter().collect(), origin: MaskOrigin::Institutional, statement_id: Some(statement) }
    }
}

fn ratio_of(a: &BTreeSet<Triple>, b: &BTreeSet<Triple>) -> Option<BigRational> {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    (union > 0).then(|| BigRational::new(BigInt::from(inter), BigInt::from(union)))
}

/// `|a ∩ b| / |a ∪ b|`, exactly.
pub fn iou(a: &Mask, b: &Mask) -> Result<BigRational, ComplianceError> {
    ratio_of(&a.triples, &b.triples).ok_or(ComplianceError::BothMasksEmpty)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatementScore {
    pub statement: Iri,
    pub mode: MaskMode,
    /// `None` when neither the agent nor the institution has triples in
    /// scope; such a statement does not apply and passes.
    #[serde(serialize_with = "ratio::serialize_opt")]
    pub iou: Option<BigRational>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplianceVerdict {
    pub agent: Option<Iri>,
    pub step: u64,
    pub scores: Vec<StatementScore>,
    #[serde(serialize_with = "ratio::serialize")]
    pub tau: BigRational,
    pub compliant: bool,
    pub triggering: Vec<Iri>,
}

impl ComplianceVerdict {
    pub fn for_agent(mut self, agent: Iri, step: u64) -> Self {
        self.agent = Some(agent);
        self.step = step;
        self
    }

    /// Line-oriented record: one `verdict` line, then one `score` line per
    /// statement in evaluation order.
    ///
    /// ```text
    /// verdict agent=<iri|-> step=<n> tau=<r> compliant=<bool> triggering=<iri,...|->
    /// score statement=<iri> mode=<permit|forbid> iou=<r|n/a> pass=<bool>
    /// ```
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let join = |v: &[Iri]| if v.is_empty() { "-".to_string() } else { v.iter().map(Iri::as_str).collect::<Vec<_>>().join(",") };
        let _ = writeln!(
            out,
            "verdict agent={} step={} tau={} compliant={} triggering={}",
            self.agent.as_ref().map_or("-", Iri::as_str),
            self.step,
            self.tau,
            self.compliant,
            join(&self.triggering)
        );
        for s in &self.scores {
            let iou = s.iou.as_ref().map_or_else(|| "n/a".to_string(), |r| r.to_string());
            let _ = writeln!(out, "score statement={} mode={} iou={} pass={}", s.statement, s.mode, iou, s.passed);
        }
        out
    }
}

fn score(g_a: &Graph, spec: &MaskSpec, mask: &Graph, tau: &BigRational) -> StatementScore {
    let aim = spec.aim();
    let mask_set = mask.triples();
    let (iou, passed) = match spec.mode {
        MaskMode::Permit => {
            let foci: BTreeSet<&Term> = mask.iter().map(Triple::subject).collect();
            let scope: BTreeSet<Triple> =
                g_a.iter().filter(|t| foci.contains(t.subject()) && aim.matches_triple(t)).cloned().collect();
            match ratio_of(&scope, mask_set) {
                Some(r) => {
                    let pass = &r >= tau;
                    (Some(r), pass)
                }
                None => (None, true),
            }
        }
        MaskMode::Forbid => {
            let scope: BTreeSet<Triple> = g_a.iter().filter(|t| aim.matches_triple(t)).cloned().collect();
            let hit = mask.iter().any(|t| g_a.contains(t));
            (ratio_of(&scope, mask_set), !hit)
        }
    };
    StatementScore { statement: spec.statement_id.clone(), mode: spec.mode, iou, passed }
}

/// Scores every compiled mask against `g_a`. The agent's permit scope is the
/// set of its triples that match the statement's aim at a node the mask
/// names.
pub fn check_compliance(g_a: &Graph, masks: &[(MaskSpec, Graph)], tau: &BigRational) -> Result<ComplianceVerdict, ComplianceError> {
    if !ratio::in_unit_interval(tau) {
        return Err(ComplianceError::ThresholdOutOfRange(tau.to_string()));
    }
    let scores: Vec<StatementScore> = masks.iter().map(|(spec, m)| score(g_a, spec, m, tau)).collect();
    let triggering: Vec<Iri> = scores.iter().filter(|s| !s.passed).map(|s| s.statement.clone()).collect();
    Ok(ComplianceVerdict { agent: None, step: 0, compliant: triggering.is_empty(), scores, tau: tau.clone(), triggering })
}

/// True iff every triple of `g_a` lies in `g_m`.
pub fn subset_alignment(g_a: &Graph, g_m: &Graph) -> bool {
    g_a.is_subset(g_m)
}
