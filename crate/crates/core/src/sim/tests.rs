use std::path::PathBuf;

use super::*;
use crate::rdf::vocab::EX;

fn fixture(name: &str) -> Scenario {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    Scenario::load(&dir.join(name)).unwrap()
}

fn ex(l: &str) -> Iri {
    Iri::new(format!("{EX}{l}"))
}

#[test]
fn contract17_end_to_end() {
    let sc = fixture("contract17.toml");
    let out = run(&sc).unwrap();
    let a = &out.ticks[0].agents[0];
    assert_eq!(a.verdict.as_ref().map(|v| v.compliant), Some(false));
    assert_eq!(a.violations.len(), 1);
    assert_eq!(a.state_before, Iri::new(inst("Active")));
    assert_eq!(a.state, Iri::new(inst("Warning")));
    assert_eq!(a.penalty, BigRational::from_integer(4.into()));
    let e = &out.explanations[0];
    assert_eq!(e.norm, ex("LegalConstraint-12"));
    assert!(e.text.contains("Agent A") && e.text.contains("Contract-17") && e.text.contains("'PartTime'"), "{}", e.text);
    assert!(out.log.len() >= 4);
    for k in [AuditKind::Enrollment, AuditKind::Verdict, AuditKind::Violation, AuditKind::Explanation, AuditKind::Transition] {
        assert_eq!(out.log.count(k), 1, "{k}");
    }
    assert!(out.log.verify().valid);
    assert!(!out.clean());
}

#[test]
fn clean_scenario_stays_active() {
    let sc = fixture("clean.toml");
    let out = run(&sc).unwrap();
    assert!(out.clean());
    assert!(out.states.values().all(|s| s.current == Iri::new(inst("Active"))));
    let kinds: BTreeSet<AuditKind> = out.log.entries().iter().map(|e| e.kind).collect();
    assert_eq!(kinds, [AuditKind::Enrollment, AuditKind::Verdict].into_iter().collect());
    assert_eq!(out.ticks.len(), 2);
    assert!(out.ticks.iter().all(|t| t.agents.len() == 2));
}

#[test]
fn strategies_agree() {
    let sc = fixture("contract17.toml");
    let a = run_with(Execution::Sequential, &sc).unwrap();
    let b = run_with(Execution::Parallel, &sc).unwrap();
    assert_eq!(a.ticks, b.ticks);
    assert_eq!(a.log.head(), b.log.head());
    assert_eq!(a.summary(), b.summary());
}

#[test]
fn vote_two_to_one() {
    let sc = fixture("vote.toml");
    let out = run(&sc).unwrap();
    let v = &out.ticks[0].votes[0];
    assert_eq!((v.yes, v.eligible), (2, 3));
    assert!(v.accepted);
    assert_eq!(out.log.count(AuditKind::Vote), 4);
    let mut strict = sc.clone();
    strict.quorum = BigRational::new(3.into(), 4.into());
    assert!(!vote_on(&strict, "p", &sc.votes[0].outcome).unwrap().accepted);
}

#[test]
fn suspended_agent_cannot_vote() {
    let sc = fixture("vote-suspended.toml");
    let v = vote_on(&sc, "p", &sc.votes[0].outcome).unwrap();
    assert_eq!(v.eligible, 2);
    assert_eq!(v.excluded.len(), 1);
    assert_eq!(v.excluded[0].0, ex("Carol"));
}

#[test]
fn no_voters_is_error() {
    let mut sc = fixture("vote-suspended.toml");
    for a in &mut sc.agents {
        a.initial_state = Some(Iri::new(inst("Suspended")));
    }
    assert!(matches!(vote_on(&sc, "p", &sc.votes[0].outcome), Err(SimError::NoEligibleVoters)));
}

#[test]
fn scenario_errors() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let base = std::fs::read_to_string(dir.join("contract17.toml")).unwrap();
    let late = base.replace("tick = 1", "tick = 5");
    assert!(matches!(Scenario::from_toml(&late, &dir), Err(SimError::Scenario(_))));
    let missing = base.replace("labour.adico", "nope.adico");
    assert!(matches!(Scenario::from_toml(&missing, &dir), Err(SimError::Io { .. })));
    let unknown = format!("{base}\nbogus = 1\n");
    assert!(matches!(Scenario::from_toml(&unknown, &dir), Err(SimError::Toml(_))));
    let quorum = base.replace("seed = 17", "seed = 17\nquorum = \"0\"");
    assert!(matches!(Scenario::from_toml(&quorum, &dir), Err(SimError::Scenario(_))));
}

#[test]
fn blocked_when_capability_withheld() {
    let mut sc = fixture("contract17.toml");
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let text = std::fs::read_to_string(dir.join("escalation.ttl")).unwrap();
    sc.governance = crate::governance::load_governance_graph(&crate::rdf::parse_turtle(&text).unwrap()).unwrap();
    sc.agents[0].initial_state = Some(Iri::new(inst("Suspended")));
    let out = run(&sc).unwrap();
    let a = &out.ticks[0].agents[0];
    assert!(a.blocked);
    assert!(a.verdict.is_none() && a.violations.is_empty());
}

#[test]
fn writes_run_directory() {
    let sc = fixture("contract17.toml");
    let out = run(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write_to(dir.path()).unwrap();
    assert!(dir.path().join("ticks/tick-0001.json").exists());
    assert!(dir.path().join(format!("explanations/{}.txt", out.explanations[0].violation_id)).exists());
    let log = AuditLog::read_from(&dir.path().join("audit.log")).unwrap();
    assert_eq!(log.head(), out.log.head());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains(&out.log.head_hex()));
}
