//! Scenario-driven multi-agent runs.
//!
//! Every tick, each agent's scripted decision is perceived, enriched with the
//! manifest's condition classes, validated, scored for compliance, explained
//! and turned into institutional signals. Pipelines for one tick read the
//! state as it stood when the tick began. Their effects are applied and
//! logged afterwards, in declaration order, so the run does not depend on the
//! execution strategy.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! manifest = "manifest.adico"      # required
//! governance = "governance.ttl"    # required
//! shapes = "extra-shapes.ttl"      # added to the compiled shapes
//! world = "world.ttl"              # facts shared by all agents
//! ticks = 2
//! seed = 7                         # feeds fixture generators only
//! tau = "1"                        # default compliance threshold
//! quorum = "1/2"
//! budget = 3                       # counterfactual search budget
//! fallback_signal = ":Violation"   # for norms outside the manifest
//!
//! [sanctions]
//! "ex:LegalConstraint-12" = "4"
//!
//! [[agents]]
//! id = "ex:AgentA"
//! controller = "ex:Acme"
//! name = "Agent A"
//! tau = "3/4"
//! shapes = "agent-a-norms.ttl"     # own norms for votes
//! state = ":Active"                # initial state override
//!
//! [[agents.decisions]]
//! tick = 1
//! relation = "ex:concludes"
//! object = "ex:Contract-17"
//! context = "ex:Contract-17 a ex:EmploymentContract ."
//!
//! [[votes]]
//! tick = 2
//! outcome = "outcome.ttl"
//! ```
//!
//! A run directory holds `ticks/tick-NNNN.json`, `explanations/<id>.txt` and
//! `<id>.json`, `audit.log` and `summary.txt`.

mod scenario;
pub mod synth;
mod vote;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::audit::{AuditError, AuditKind, AuditLog};
use crate::compliance::{check_compliance, perceive, ComplianceError, ComplianceVerdict, Decision};
use crate::exec::{self, Execution};
use crate::explain::{attach_evidence, explain_counterfactual_with, explain_factual, render, CounterfactualExplanation, ExplainError, FactualExplanation, TemplateSet};
use crate::governance::{oracle_tick, AgentInstitutionalState, GovernanceError, GovernanceGraph, HistoryEntry, Signal, SignalRouting};
use crate::identity::{IdentityError, IdentityRegistry};
use crate::manifest::{compile_to_masks, materialize_conditions, ManifestError};
use crate::ratio;
use crate::rdf::vocab::inst;
use crate::rdf::{Iri, RdfError, Term};
use crate::shacl::ShapeError;

pub use scenario::{AgentSpec, Scenario, ScheduledVote, ScriptedDecision};
pub use vote::{collective_vote, Ballot, VoteOutcome, Voter};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("no eligible voters")]
    NoEligibleVoters,
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Governance(#[from] GovernanceError),
    #[error(transparent)]
    Compliance(#[from] ComplianceError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Agent id under which institution-level entries are logged.
pub fn institution() -> Iri {
    Iri::new(inst("Institution"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionRecord {
    pub relation: Iri,
    pub object: Term,
    pub triples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub conforms: bool,
    pub violations: usize,
    pub by_norm: BTreeMap<Iri, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SanctionRecord {
    pub statement: Iri,
    #[serde(serialize_with = "ratio::serialize")]
    pub magnitude: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentTick {
    pub agent: Iri,
    pub state_before: Iri,
    pub decision: Option<DecisionRecord>,
    /// The decision's relation is withheld in the agent's current state.
    pub blocked: bool,
    pub report: Option<ReportSummary>,
    pub verdict: Option<ComplianceVerdict>,
    pub violations: Vec<String>,
    pub explanations: Vec<String>,
    pub signals: Vec<Signal>,
    pub transitions: Vec<HistoryEntry>,
    pub state: Iri,
    pub sanctions: Vec<SanctionRecord>,
    #[serde(serialize_with = "ratio::serialize")]
    pub penalty: BigRational,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TickReport {
    pub tick: u64,
    pub agents: Vec<AgentTick>,
    pub votes: Vec<VoteOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExplanationRecord {
    pub violation_id: String,
    pub agent: Iri,
    pub step: u64,
    pub norm: Iri,
    pub template: String,
    pub text: String,
    pub factual: FactualExplanation,
    pub counterfactual: CounterfactualExplanation,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub ticks: Vec<TickReport>,
    pub explanations: Vec<ExplanationRecord>,
    pub log: AuditLog,
    pub states: BTreeMap<Iri, AgentInstitutionalState>,
    pub registry: IdentityRegistry,
    summary: String,
}

impl RunOutput {
    pub fn violation_count(&self) -> usize {
        self.ticks.iter().flat_map(|t| &t.agents).map(|a| a.violations.len()).sum()
    }

    pub fn noncompliant_count(&self) -> usize {
        self.ticks.iter().flat_map(|t| &t.agents).filter(|a| a.verdict.as_ref().is_some_and(|v| !v.compliant)).count()
    }

    pub fn clean(&self) -> bool {
        self.violation_count() == 0 && self.noncompliant_count() == 0
    }

    pub fn summary(&self) -> &str {
        &self.summary
    }

    /// Writes the run directory; existing files are overwritten.
    pub fn write_to(&self, dir: &Path) -> Result<(), SimError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SimError::Io { path, source }
        };
        let ticks = dir.join("ticks");
        let expl = dir.join("explanations");
        for d in [&ticks, &expl] {
            std::fs::create_dir_all(d).map_err(io(d))?;
        }
        for t in &self.ticks {
            let p = ticks.join(format!("tick-{:04}.json", t.tick));
            std::fs::write(&p, serde_json::to_string_pretty(t)? + "\n").map_err(io(&p))?;
        }
        for e in &self.explanations {
            let txt = expl.join(format!("{}.txt", e.violation_id));
            std::fs::write(&txt, &e.text).map_err(io(&txt))?;
            let json = expl.join(format!("{}.json", e.violation_id));
            std::fs::write(&json, serde_json::to_string_pretty(e)? + "\n").map_err(io(&json))?;
        }
        self.log.write_to(&dir.join("audit.log"))?;
        let s = dir.join("summary.txt");
        std::fs::write(&s, &self.summary).map_err(io(&s))?;
        Ok(())
    }
}

/// Identity-level and state-level exclusion from votes: revoked agents, and
/// agents whose state is named `Suspended` or withholds `inst:vote`.
pub fn vote_exclusion(gg: &GovernanceGraph, registry: &IdentityRegistry, s: &AgentInstitutionalState) -> Option<String> {
    if !registry.is_active(&s.agent) {
        return Some("revoked".into());
    }
    let withheld = gg.restrictions.get(&s.current).is_some_and(|r| r.contains(&Iri::new(inst("vote"))));
    (s.current.local_name() == "Suspended" || withheld).then(|| format!("state {}", s.current.local_name()))
}

struct Effects {
    tick: AgentTick,
    state: AgentInstitutionalState,
    penalty: BigRational,
    entries: Vec<(AuditKind, String)>,
    explanations: Vec<ExplanationRecord>,
}

struct Env<'a> {
    sc: &'a Scenario,
    routing: &'a SignalRouting,
    templates: &'a TemplateSet,
    registry: &'a IdentityRegistry,
    exec: Execution,
}

fn idle(state: &AgentInstitutionalState, penalty: &BigRational) -> AgentTick {
    AgentTick {
        agent: state.agent.clone(),
        state_before: state.current.clone(),
        decision: None,
        blocked: false,
        report: None,
        verdict: None,
        violations: Vec::new(),
        explanations: Vec::new(),
        signals: Vec::new(),
        transitions: Vec::new(),
        state: state.current.clone(),
        sanctions: Vec::new(),
        penalty: penalty.clone(),
        failure: None,
    }
}

fn pipeline(env: &Env<'_>, spec: &AgentSpec, state: &AgentInstitutionalState, penalty: &BigRational, t: u64) -> Effects {
    match try_pipeline(env, spec, state, penalty, t) {
        Ok(e) => e,
        Err(err) => {
            let mut tick = idle(state, penalty);
            tick.failure = Some(err.to_string());
            Effects {
                tick,
                state: state.clone(),
                penalty: penalty.clone(),
                entries: vec![(AuditKind::Failure, format!("failure agent={} step={t} error={err}\n", state.agent))],
                explanations: Vec::new(),
            }
        }
    }
}

fn try_pipeline(env: &Env<'_>, spec: &AgentSpec, state: &AgentInstitutionalState, penalty: &BigRational, t: u64) -> Result<Effects, SimError> {
    let sc = env.sc;
    let mut tick = idle(state, penalty);
    let mut entries = Vec::new();
    let mut explanations = Vec::new();
    let Some(d) = spec.decisions.get(&t) else {
        return Ok(Effects { tick, state: state.clone(), penalty: penalty.clone(), entries, explanations });
    };
    let decision = Decision { agent: spec.id.clone(), relation: Term::Iri(d.relation.clone()), object: d.object.clone(), context: d.context.clone(), step: t };
    let g_a = perceive(&decision)?;
    tick.decision = Some(DecisionRecord { relation: d.relation.clone(), object: d.object.clone(), triples: g_a.len() });

    if sc.governance.restrictions.get(&state.current).is_some_and(|r| r.contains(&d.relation)) {
        tick.blocked = true;
        entries.push((AuditKind::Verdict, format!("blocked agent={} step={t} relation={} state={}\n", spec.id, d.relation, state.current)));
        return Ok(Effects { tick, state: state.clone(), penalty: penalty.clone(), entries, explanations });
    }

    let mut combined = sc.world.clone();
    combined.extend(g_a.iter().cloned());
    let enriched = materialize_conditions(&sc.manifest, &combined)?;
    let report = crate::shacl::validate(&enriched, &sc.shapes)?;
    let masks = compile_to_masks(&sc.manifest, &enriched);
    let verdict = check_compliance(&enriched, &masks, sc.tau_for(spec))?.for_agent(spec.id.clone(), t);

    let mut by_norm = BTreeMap::new();
    for r in report.violations() {
        *by_norm.entry(r.norm_id.clone()).or_insert(0) += 1;
    }
    tick.report = Some(ReportSummary { conforms: report.conforms, violations: report.violation_count(), by_norm });
    entries.push((AuditKind::Verdict, format!("{}report conforms={} violations={}\n", verdict.to_record(), report.conforms, report.violation_count())));

    let mut factual = explain_factual(&report, &enriched, &spec.id, t)?;
    attach_evidence(&mut factual, &sc.manifest, &enriched);
    for f in &factual {
        let mut payload = format!("violation id={} norm={} shape={} focus={} kind={}\n", f.violation_id, f.norm_id, f.source_shape, f.focus, f.kind);
        for tr in &f.offending {
            let _ = writeln!(payload, "{tr}");
        }
        entries.push((AuditKind::Violation, payload));
        tick.violations.push(f.violation_id.clone());
    }
    for f in factual {
        let cf = explain_counterfactual_with(env.exec, &enriched, &sc.shapes, &f, sc.budget)?;
        let r = render(&f, &cf, env.registry, env.templates)?;
        let rec = ExplanationRecord {
            violation_id: f.violation_id.clone(),
            agent: spec.id.clone(),
            step: t,
            norm: f.norm_id.clone(),
            template: r.template_id,
            text: r.text,
            factual: f,
            counterfactual: cf,
        };
        entries.push((AuditKind::Explanation, serde_json::to_string(&rec)?));
        tick.explanations.push(rec.violation_id.clone());
        explanations.push(rec);
    }

    let (next, signals) = oracle_tick(&sc.governance, state, &report, Some(&verdict), env.routing, t)?;
    let new_entries = &next.history[state.history.len()..];
    for (h, s) in new_entries.iter().zip(&signals) {
        entries.push((
            AuditKind::Transition,
            format!(
                "transition signal={} source={:?} norm={} from={} to={} applied={}\n",
                h.signal,
                s.source,
                s.norm_id.as_ref().map_or("-", Iri::as_str),
                h.from,
                h.to,
                h.applied
            ),
        ));
    }
    tick.transitions = new_entries.to_vec();
    tick.signals = signals;
    tick.state = next.current.clone();

    let norms: BTreeSet<Iri> = report.violations().map(|r| r.norm_id.clone()).chain(verdict.triggering.iter().cloned()).collect();
    let mut total = penalty.clone();
    for n in norms {
        if let Some(m) = sc.sanctions.get(&n) {
            total += m;
            tick.sanctions.push(SanctionRecord { statement: n, magnitude: m.clone() });
        }
    }
    tick.penalty = total.clone();
    tick.verdict = Some(verdict);
    Ok(Effects { tick, state: next, penalty: total, entries, explanations })
}

pub fn run(sc: &Scenario) -> Result<RunOutput, SimError> {
    run_with(Execution::default(), sc)
}

fn initial_state(gg: &GovernanceGraph, spec: &AgentSpec) -> AgentInstitutionalState {
    let mut s = gg.new_agent(spec.id.clone());
    if let Some(q) = &spec.initial_state {
        s.current = q.clone();
    }
    s
}

fn enroll_all(sc: &Scenario, log: &mut AuditLog) -> Result<IdentityRegistry, SimError> {
    let mut registry = IdentityRegistry::new();
    for a in &sc.agents {
        let attrs = a.name.iter().map(|n| ("name".to_string(), n.clone())).collect();
        registry.enroll_with(log, a.id.clone(), a.controller.clone(), 0, attrs)?;
    }
    Ok(registry)
}

fn run_vote(
    sc: &Scenario,
    registry: &IdentityRegistry,
    states: &[AgentInstitutionalState],
    label: &str,
    outcome: &crate::rdf::Graph,
) -> Result<VoteOutcome, SimError> {
    let enriched = materialize_conditions(&sc.manifest, outcome)?;
    let voters: Vec<Voter<'_>> = sc
        .agents
        .iter()
        .zip(states)
        .map(|(a, s)| Voter {
            agent: a.id.clone(),
            shapes: a.shapes.as_deref().unwrap_or(&sc.shapes),
            excluded: vote_exclusion(&sc.governance, registry, s),
        })
        .collect();
    collective_vote(label, &voters, &enriched, &sc.quorum)
}

/// A single vote among the scenario's agents in their initial states.
pub fn vote_on(sc: &Scenario, label: &str, outcome: &crate::rdf::Graph) -> Result<VoteOutcome, SimError> {
    let mut scratch = AuditLog::new();
    let registry = enroll_all(sc, &mut scratch)?;
    let states: Vec<_> = sc.agents.iter().map(|a| initial_state(&sc.governance, a)).collect();
    run_vote(sc, &registry, &states, label, outcome)
}

fn log_vote(log: &mut AuditLog, v: &VoteOutcome, t: u64) -> Result<(), SimError> {
    for b in &v.ballots {
        log.append(AuditKind::Vote, &b.agent, t, format!("ballot proposal={} yes={} violations={}\n", v.label, b.yes, b.violations))?;
    }
    let payload = format!("tally proposal={} yes={} eligible={} quorum={} accepted={}\n", v.label, v.yes, v.eligible, v.quorum, v.accepted);
    log.append(AuditKind::Vote, &institution(), t, payload)?;
    Ok(())
}

pub fn run_with(exec: Execution, sc: &Scenario) -> Result<RunOutput, SimError> {
    let mut log = AuditLog::new();
    let registry = enroll_all(sc, &mut log)?;
    let mut routing = SignalRouting::from_manifest(&sc.manifest);
    if let Some(f) = &sc.fallback_signal {
        routing = routing.with_fallback(f.clone());
    }
    let templates = TemplateSet::builtin();
    let env = Env { sc, routing: &routing, templates: &templates, registry: &registry, exec };

    let mut states: Vec<AgentInstitutionalState> = sc.agents.iter().map(|a| initial_state(&sc.governance, a)).collect();
    let mut penalties: Vec<BigRational> = vec![BigRational::zero(); sc.agents.len()];
    let mut ticks = Vec::new();
    let mut explanations = Vec::new();
    let indices: Vec<usize> = (0..sc.agents.len()).collect();
    for t in 1..=sc.ticks {
        let effects = exec::map(exec, &indices, |&i| pipeline(&env, &sc.agents[i], &states[i], &penalties[i], t));
        let mut agents = Vec::new();
        for (i, e) in effects.into_iter().enumerate() {
            for (kind, payload) in e.entries {
                log.append(kind, &sc.agents[i].id, t, payload)?;
            }
            states[i] = e.state;
            penalties[i] = e.penalty;
            explanations.extend(e.explanations);
            agents.push(e.tick);
        }
        let mut votes = Vec::new();
        for v in sc.votes.iter().filter(|v| v.tick == t) {
            let outcome = run_vote(sc, &registry, &states, &v.label, &v.outcome)?;
            log_vote(&mut log, &outcome, t)?;
            votes.push(outcome);
        }
        ticks.push(TickReport { tick: t, agents, votes });
    }

    let states: BTreeMap<Iri, AgentInstitutionalState> = states.into_iter().map(|s| (s.agent.clone(), s)).collect();
    let mut out = RunOutput { ticks, explanations, log, states, registry, summary: String::new() };
    out.summary = summarize(sc, &out, &penalties);
    Ok(out)
}

fn summarize(sc: &Scenario, out: &RunOutput, penalties: &[BigRational]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ticks={} seed={} agents={}", sc.ticks, sc.seed, sc.agents.len());
    let _ = writeln!(s, "manifest version={} digest={}", sc.manifest.version, sc.manifest.digest);
    for (a, p) in sc.agents.iter().zip(penalties) {
        let violations: usize = out.ticks.iter().flat_map(|t| &t.agents).filter(|x| x.agent == a.id).map(|x| x.violations.len()).sum();
        let _ = writeln!(s, "agent {} state={} penalty={} violations={}", a.id, out.states[&a.id].current, p, violations);
    }
    for t in &out.ticks {
        for v in &t.votes {
            let _ = writeln!(s, "vote tick={} proposal={} tally={} accepted={}", t.tick, v.label, v.tally(), v.accepted);
        }
    }
    let _ = writeln!(s, "violations={} noncompliant={}", out.violation_count(), out.noncompliant_count());
    let _ = writeln!(s, "audit entries={} head={}", out.log.len(), out.log.head_hex());
    s
}

#[cfg(test)]
mod tests;
