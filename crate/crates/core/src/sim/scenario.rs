use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use super::SimError;
use crate::governance::{load_governance_graph, GovernanceGraph};
use crate::manifest::{compile_to_shapes, parse_manifest, Manifest};
use crate::ratio::{in_unit_interval, parse_rational};
use crate::rdf::{parse_term, parse_turtle, Graph, Iri, Term};
use crate::shacl::{parse_shapes, Shape};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    manifest: String,
    governance: String,
    shapes: Option<String>,
    world: Option<String>,
    ticks: u64,
    #[serde(default)]
    seed: u64,
    tau: Option<String>,
    quorum: Option<String>,
    budget: Option<usize>,
    fallback_signal: Option<String>,
    #[serde(default)]
    sanctions: BTreeMap<String, String>,
    agents: Vec<AgentFile>,
    #[serde(default)]
    votes: Vec<VoteFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentFile {
    id: String,
    controller: String,
    name: Option<String>,
    tau: Option<String>,
    shapes: Option<String>,
    state: Option<String>,
    #[serde(default)]
    decisions: Vec<DecisionFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionFile {
    tick: u64,
    relation: String,
    object: String,
    #[serde(default)]
    context: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VoteFile {
    tick: u64,
    outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptedDecision {
    pub tick: u64,
    pub relation: Iri,
    pub object: Term,
    pub context: Graph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSpec {
    pub id: Iri,
    pub controller: Iri,
    pub name: Option<String>,
    pub tau: Option<BigRational>,
    /// Internalized norms used when voting; the institution's shapes if unset.
    pub shapes: Option<Vec<Shape>>,
    pub initial_state: Option<Iri>,
    pub decisions: BTreeMap<u64, ScriptedDecision>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledVote {
    pub tick: u64,
    pub label: String,
    pub outcome: Graph,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub manifest: Manifest,
    pub governance: GovernanceGraph,
    /// Compiled manifest shapes plus any supplied extra shapes.
    pub shapes: Vec<Shape>,
    pub world: Graph,
    pub ticks: u64,
    pub seed: u64,
    pub tau: BigRational,
    pub quorum: BigRational,
    pub budget: usize,
    pub fallback_signal: Option<Iri>,
    pub sanctions: BTreeMap<Iri, BigRational>,
    pub agents: Vec<AgentSpec>,
    pub votes: Vec<ScheduledVote>,
}

fn read(base: &Path, rel: &str) -> Result<String, SimError> {
    let path: PathBuf = base.join(rel);
    std::fs::read_to_string(&path).map_err(|source| SimError::Io { path, source })
}

fn bad(field: &str, value: &str) -> SimError {
    SimError::Scenario(format!("{field}: invalid value `{value}`"))
}

fn iri(field: &str, text: &str) -> Result<Iri, SimError> {
    match parse_term(text, Graph::new().prefixes()) {
        Ok(Term::Iri(i)) => Ok(i),
        _ => Err(bad(field, text)),
    }
}

fn ratio(field: &str, text: &str) -> Result<BigRational, SimError> {
    parse_rational(text).ok_or_else(|| bad(field, text))
}

fn shapes_file(base: &Path, rel: &str) -> Result<Vec<Shape>, SimError> {
    Ok(parse_shapes(&parse_turtle(&read(base, rel)?)?)?)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.to_path_buf(), source })?;
        Scenario::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses a scenario; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Scenario, SimError> {
        let f: ScenarioFile = toml::from_str(text)?;
        let manifest = parse_manifest(&read(base, &f.manifest)?)?;
        let governance = load_governance_graph(&parse_turtle(&read(base, &f.governance)?)?)?;
        let mut shapes = compile_to_shapes(&manifest)?;
        if let Some(extra) = &f.shapes {
            shapes.extend(shapes_file(base, extra)?);
        }
        let world = match &f.world {
            Some(w) => parse_turtle(&read(base, w)?)?,
            None => Graph::new(),
        };
        let tau = f.tau.as_deref().map(|t| ratio("tau", t)).transpose()?.unwrap_or_else(BigRational::one);
        let quorum = f.quorum.as_deref().map(|q| ratio("quorum", q)).transpose()?.unwrap_or_else(|| BigRational::new(1.into(), 2.into()));
        if !in_unit_interval(&tau) {
            return Err(bad("tau", &tau.to_string()));
        }
        if quorum.is_zero() || !in_unit_interval(&quorum) {
            return Err(bad("quorum", &quorum.to_string()));
        }
        let fallback_signal = match &f.fallback_signal {
            Some(s) => Some(iri("fallback_signal", s)?),
            None if manifest.signals.len() == 1 => manifest.signals.iter().next().cloned(),
            None => None,
        };
        if let Some(s) = &fallback_signal {
            if !governance.signals.contains(s) {
                return Err(bad("fallback_signal", s.as_str()));
            }
        }
        let mut sanctions = BTreeMap::new();
        for (k, v) in &f.sanctions {
            let m = ratio("sanctions", v)?;
            if m < BigRational::zero() {
                return Err(bad("sanctions", v));
            }
            sanctions.insert(iri("sanctions", k)?, m);
        }

        let mut seen = BTreeSet::new();
        let mut agents = Vec::new();
        for a in &f.agents {
            let id = iri("agents.id", &a.id)?;
            if !seen.insert(id.clone()) {
                return Err(SimError::Scenario(format!("agent {id} declared twice")));
            }
            let tau = a.tau.as_deref().map(|t| ratio("agents.tau", t)).transpose()?;
            if tau.as_ref().is_some_and(|t| !in_unit_interval(t)) {
                return Err(bad("agents.tau", a.tau.as_deref().unwrap_or_default()));
            }
            let initial_state = a.state.as_deref().map(|s| iri("agents.state", s)).transpose()?;
            if let Some(s) = &initial_state {
                if !governance.states.contains(s) {
                    return Err(bad("agents.state", s.as_str()));
                }
            }
            let mut decisions = BTreeMap::new();
            for d in &a.decisions {
                if d.tick == 0 || d.tick > f.ticks {
                    return Err(SimError::Scenario(format!("decision of {id} at tick {} lies outside 1..={}", d.tick, f.ticks)));
                }
                let object = parse_term(&d.object, Graph::new().prefixes())?;
                let dec = ScriptedDecision { tick: d.tick, relation: iri("decisions.relation", &d.relation)?, object, context: parse_turtle(&d.context)? };
                if decisions.insert(d.tick, dec).is_some() {
                    return Err(SimError::Scenario(format!("agent {id} has two decisions at tick {}", d.tick)));
                }
            }
            agents.push(AgentSpec {
                id,
                controller: iri("agents.controller", &a.controller)?,
                name: a.name.clone(),
                tau,
                shapes: a.shapes.as_deref().map(|s| shapes_file(base, s)).transpose()?,
                initial_state,
                decisions,
            });
        }
        let mut votes = Vec::new();
        for v in &f.votes {
            if v.tick == 0 || v.tick > f.ticks {
                return Err(SimError::Scenario(format!("vote at tick {} lies outside 1..={}", v.tick, f.ticks)));
            }
            votes.push(ScheduledVote { tick: v.tick, label: v.outcome.clone(), outcome: parse_turtle(&read(base, &v.outcome)?)? });
        }
        Ok(Scenario {
            manifest,
            governance,
            shapes,
            world,
            ticks: f.ticks,
            seed: f.seed,
            tau,
            quorum,
            budget: f.budget.unwrap_or(3),
            fallback_signal,
            sanctions,
            agents,
            votes,
        })
    }

    pub fn tau_for<'a>(&'a self, agent: &'a AgentSpec) -> &'a BigRational {
        agent.tau.as_ref().unwrap_or(&self.tau)
    }
}
