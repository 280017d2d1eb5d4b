//! The institutional state machine: states, signals, a deterministic partial
//! transition function and per-state capability restrictions, loaded from
//! and written to RDF.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::compliance::ComplianceVerdict;
use crate::manifest::Manifest;
use crate::rdf::vocab::{inst, rdf_type};
use crate::rdf::{Graph, Iri, Term, Triple};
use crate::shacl::{Severity, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GovernanceError {
    #[error("transitions {first} and {second} both leave {from} on {signal}")]
    NonDeterministic { from: Iri, signal: Iri, first: Box<Term>, second: Box<Term> },
    #[error("transition {transition} references undeclared state {state}")]
    UndeclaredState { transition: Term, state: Iri },
    #[error("transition {transition} references undeclared signal {signal}")]
    UndeclaredSignal { transition: Term, signal: Iri },
    #[error("transition {transition} needs exactly one {property}")]
    MalformedTransition { transition: Term, property: &'static str },
    #[error("no initial state: declare inst:initialState or a single state named Active")]
    MissingInitial,
    #[error("conflicting initial states {0} and {1}")]
    ConflictingInitial(Iri, Iri),
    #[error("initial state {0} is not a declared state")]
    InitialNotState(Iri),
    #[error("restriction on undeclared state {0}")]
    RestrictionOnUnknownState(Iri),
    #[error("unknown signal {0}")]
    UnknownSignal(Iri),
    #[error("time step {got} does not follow {last}")]
    TimeRegression { last: u64, got: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GovernanceGraph {
    pub states: BTreeSet<Iri>,
    pub signals: BTreeSet<Iri>,
    pub delta: BTreeMap<(Iri, Iri), Iri>,
    pub initial: Iri,
    pub restrictions: BTreeMap<Iri, BTreeSet<Iri>>,
}

fn p(local: &str) -> Iri {
    Iri::new(inst(local))
}

fn single(g: &Graph, s: &Term, prop: &'static str) -> Result<Iri, GovernanceError> {
    let pred = p(prop);
    let vals: Vec<&Term> = g.objects(s, &pred).collect();
    match vals.as_slice() {
        [Term::Iri(i)] => Ok(i.clone()),
        _ => Err(GovernanceError::MalformedTransition { transition: s.clone(), property: prop }),
    }
}

fn instances(g: &Graph, class: &str) -> BTreeSet<Term> {
    let ty = Iri::new(rdf_type());
    let c = Term::iri(inst(class));
    g.subjects_with(&ty, &c).cloned().collect()
}

fn iris(ts: BTreeSet<Term>) -> BTreeSet<Iri> {
    ts.into_iter().filter_map(|t| t.as_iri().cloned()).collect()
}

/// Reads `inst:State`, `inst:Signal` and `inst:Transition` instances. The
/// initial state is the object of `inst:initialState`, or else the single
/// state whose local name is `Active`. `state inst:restricts cap` withholds a
/// capability in that state.
pub fn load_governance_graph(g: &Graph) -> Result<GovernanceGraph, GovernanceError> {
    let states = iris(instances(g, "State"));
    let signals = iris(instances(g, "Signal"));
    let mut delta = BTreeMap::new();
    let mut origin: BTreeMap<(Iri, Iri), Term> = BTreeMap::new();
    for t in instances(g, "Transition") {
        let from = single(g, &t, "fromState")?;
        let sig = single(g, &t, "onSignal")?;
        let to = single(g, &t, "toState")?;
        for s in [&from, &to] {
            if !states.contains(s) {
                return Err(GovernanceError::UndeclaredState { transition: t.clone(), state: s.clone() });
            }
        }
        if !signals.contains(&sig) {
            return Err(GovernanceError::UndeclaredSignal { transition: t.clone(), signal: sig });
        }
        let key = (from, sig);
        if let Some(first) = origin.get(&key) {
            return Err(GovernanceError::NonDeterministic { from: key.0, signal: key.1, first: Box::new(first.clone()), second: Box::new(t) });
        }
        origin.insert(key.clone(), t.clone());
        delta.insert(key, to);
    }

    let init_pred = p("initialState");
    let mut declared: Option<Iri> = None;
    for tr in g.iter().filter(|tr| tr.predicate() == &init_pred) {
        let Term::Iri(i) = tr.object() else { continue };
        match &declared {
            Some(prev) if prev != i => return Err(GovernanceError::ConflictingInitial(prev.clone(), i.clone())),
            _ => declared = Some(i.clone()),
        }
    }
    let initial = match declared {
        Some(i) if states.contains(&i) => i,
        Some(i) => return Err(GovernanceError::InitialNotState(i)),
        None => {
            let active: Vec<&Iri> = states.iter().filter(|s| s.local_name() == "Active").collect();
            match active.as_slice() {
                [one] => (*one).clone(),
                _ => return Err(GovernanceError::MissingInitial),
            }
        }
    };

    let restricts = p("restricts");
    let mut restrictions: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for tr in g.iter().filter(|tr| tr.predicate() == &restricts) {
        let (Term::Iri(state), Term::Iri(cap)) = (tr.subject(), tr.object()) else { continue };
        if !states.contains(state) {
            return Err(GovernanceError::RestrictionOnUnknownState(state.clone()));
        }
        restrictions.entry(state.clone()).or_default().insert(cap.clone());
    }
    Ok(GovernanceGraph { states, signals, delta, initial, restrictions })
}

/// Inverse of [`load_governance_graph`]; transitions become blank nodes.
pub fn serialize_governance(gg: &GovernanceGraph) -> Graph {
    let ty = Iri::new(rdf_type());
    let mut g = Graph::new();
    let mut add = |s: Term, pr: Iri, o: Term| {
        g.insert(Triple::new(s, pr, o).expect("governance encoding is well formed"));
    };
    for s in &gg.states {
        add(Term::Iri(s.clone()), ty.clone(), Term::iri(inst("State")));
    }
    for s in &gg.signals {
        add(Term::Iri(s.clone()), ty.clone(), Term::iri(inst("Signal")));
    }
    for (i, ((from, sig), to)) in gg.delta.iter().enumerate() {
        let node = Term::blank(format!("t{i}"));
        add(node.clone(), ty.clone(), Term::iri(inst("Transition")));
        add(node.clone(), p("fromState"), Term::Iri(from.clone()));
        add(node.clone(), p("onSignal"), Term::Iri(sig.clone()));
        add(node, p("toState"), Term::Iri(to.clone()));
    }
    add(Term::iri(inst("governance")), p("initialState"), Term::Iri(gg.initial.clone()));
    for (state, caps) in &gg.restrictions {
        for c in caps {
            add(Term::Iri(state.clone()), p("restricts"), Term::Iri(c.clone()));
        }
    }
    g
}

impl GovernanceGraph {
    pub fn next(&self, state: &Iri, signal: &Iri) -> Option<&Iri> {
        self.delta.get(&(state.clone(), signal.clone()))
    }

    pub fn new_agent(&self, agent: Iri) -> AgentInstitutionalState {
        AgentInstitutionalState { agent, current: self.initial.clone(), history: Vec::new() }
    }

    /// Left fold of `delta` from the initial state; undefined pairs keep the
    /// state.
    pub fn fold<'a>(&'a self, signals: impl IntoIterator<Item = &'a Iri>) -> &'a Iri {
        signals.into_iter().fold(&self.initial, |q, e| self.next(q, e).unwrap_or(q))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalSource {
    Validator,
    Compliance,
    Manual,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Signal {
    pub id: Iri,
    pub source: SignalSource,
    pub norm_id: Option<Iri>,
    pub focus: Option<Term>,
}

impl Signal {
    pub fn manual(id: Iri) -> Self {
        Signal { id, source: SignalSource::Manual, norm_id: None, focus: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub step: u64,
    /// Order among entries of the same step.
    pub seq: u32,
    pub signal: Iri,
    pub from: Iri,
    pub to: Iri,
    /// False for a recorded no-op on an undefined transition.
    pub applied: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentInstitutionalState {
    pub agent: Iri,
    pub current: Iri,
    pub history: Vec<HistoryEntry>,
}

impl AgentInstitutionalState {
    fn last_step(&self) -> Option<u64> {
        self.history.last().map(|h| h.step)
    }

    fn apply(&mut self, gg: &GovernanceGraph, signal: &Iri, step: u64, seq: u32) -> Result<(), GovernanceError> {
        if !gg.signals.contains(signal) {
            return Err(GovernanceError::UnknownSignal(signal.clone()));
        }
        let from = self.current.clone();
        let (to, applied) = match gg.next(&from, signal) {
            Some(to) => (to.clone(), true),
            None => (from.clone(), false),
        };
        self.current = to.clone();
        self.history.push(HistoryEntry { step, seq, signal: signal.clone(), from, to, applied });
        Ok(())
    }

    /// Folds the history from the initial state and compares with `current`.
    pub fn replays(&self, gg: &GovernanceGraph) -> bool {
        let ordered = self.history.windows(2).all(|w| (w[0].step, w[0].seq) < (w[1].step, w[1].seq));
        ordered && gg.fold(self.history.iter().map(|h| &h.signal)) == &self.current
    }
}

/// Applies one signal at step `t`, which must exceed the last recorded step.
pub fn step(gg: &GovernanceGraph, s: &AgentInstitutionalState, sig: &Signal, t: u64) -> Result<AgentInstitutionalState, GovernanceError> {
    if let Some(last) = s.last_step() {
        if t <= last {
            return Err(GovernanceError::TimeRegression { last, got: t });
        }
    }
    let mut next = s.clone();
    next.apply(gg, &sig.id, t, 0)?;
    Ok(next)
}

/// `current` minus the capabilities its state withholds.
pub fn allowed_capabilities(gg: &GovernanceGraph, s: &AgentInstitutionalState, all: &BTreeSet<Iri>) -> BTreeSet<Iri> {
    match gg.restrictions.get(&s.current) {
        Some(r) => all.difference(r).cloned().collect(),
        None => all.clone(),
    }
}

/// Maps norm ids to the signal they emit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignalRouting {
    pub by_norm: BTreeMap<Iri, Iri>,
    /// Used for norms absent from `by_norm`, such as shapes supplied outside
    /// the manifest. Without it such results emit nothing.
    pub fallback: Option<Iri>,
}

impl SignalRouting {
    pub fn from_manifest(m: &Manifest) -> Self {
        SignalRouting {
            by_norm: m.signal_map().into_iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            fallback: None,
        }
    }

    pub fn with_fallback(mut self, signal: Iri) -> Self {
        self.fallback = Some(signal);
        self
    }

    fn route(&self, norm: &Iri) -> Option<&Iri> {
        self.by_norm.get(norm).or(self.fallback.as_ref())
    }
}

/// Signals for one agent step: one per distinct violation-level (norm, focus)
/// in the report, plus one per statement the verdict flags that the report
/// did not already cover. Sorted by (norm, focus).
pub fn signals_for(report: &ValidationReport, verdict: Option<&ComplianceVerdict>, routing: &SignalRouting) -> Vec<Signal> {
    let mut keyed: BTreeMap<(Iri, Option<Term>), Signal> = BTreeMap::new();
    for r in report.results.iter().filter(|r| r.severity == Severity::Violation) {
        if let Some(sig) = routing.route(&r.norm_id) {
            keyed.entry((r.norm_id.clone(), Some(r.focus.clone()))).or_insert_with(|| Signal {
                id: sig.clone(),
                source: SignalSource::Validator,
                norm_id: Some(r.norm_id.clone()),
                focus: Some(r.focus.clone()),
            });
        }
    }
    if let Some(v) = verdict {
        let covered: BTreeSet<&Iri> = report.violations().map(|r| &r.norm_id).collect();
        for norm in v.triggering.iter().filter(|n| !covered.contains(n)) {
            if let Some(sig) = routing.route(norm) {
                keyed.insert(
                    (norm.clone(), None),
                    Signal { id: sig.clone(), source: SignalSource::Compliance, norm_id: Some(norm.clone()), focus: None },
                );
            }
        }
    }
    keyed.into_values().collect()
}

/// Emits [`signals_for`] and folds them into the state at step `t`, all
/// sharing that step with increasing `seq`.
pub fn oracle_tick(
    gg: &GovernanceGraph,
    s: &AgentInstitutionalState,
    report: &ValidationReport,
    verdict: Option<&ComplianceVerdict>,
    routing: &SignalRouting,
    t: u64,
) -> Result<(AgentInstitutionalState, Vec<Signal>), GovernanceError> {
    let signals = signals_for(report, verdict, routing);
    if signals.is_empty() {
        return Ok((s.clone(), signals));
    }
    if let Some(last) = s.last_step() {
        if t <= last {
            return Err(GovernanceError::TimeRegression { last, got: t });
        }
    }
    let mut next = s.clone();
    for (seq, sig) in signals.iter().enumerate() {
        next.apply(gg, &sig.id, t, seq as u32)?;
    }
    Ok((next, signals))
}
